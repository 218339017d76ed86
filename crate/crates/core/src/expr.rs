//! A minimal expression language over variables `q1..q9`, `p1..p9`,
//! `l1..l9` (lambda components) and rational constants, with a recursive
//! descent parser, symbolic differentiation, complex evaluation and the
//! canonical Poisson bracket.
//!
//! Grammar:
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' int)?          int may carry a leading '-'
//! base   := number | 'i' | ident | func '(' expr ')' | '(' expr ')'
//! ident  := q1..q9 | p1..p9 | l1..l9
//! func   := exp | sin | cos
//! ```
//!
//! Whitespace insensitive, left associative, errors carry byte offsets.
//! Numbers are integer or decimal literals, converted exactly. ASTs are
//! kept in a canonical form: sums and products flattened and sorted under a
//! fixed node order, constants folded, like terms combined. This is not a
//! full CAS normal form; identities beyond that are checked numerically.

use crate::ratio::{q_from_f64, Q};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub const MAX_VAR_INDEX: u8 = 9;
const MAX_EXPONENT: i32 = 64;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum VarKind {
    Q,
    P,
    L,
}

impl VarKind {
    pub fn letter(self) -> char {
        match self {
            VarKind::Q => 'q',
            VarKind::P => 'p',
            VarKind::L => 'l',
        }
    }
}

/// A variable such as `q1` or `l3`; indices are 1-based as written.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Var {
    pub kind: VarKind,
    pub index: u8,
}

impl Var {
    pub fn new(kind: VarKind, index: u8) -> Self {
        assert!(
            (1..=MAX_VAR_INDEX).contains(&index),
            "variable index {index} out of 1..={MAX_VAR_INDEX}"
        );
        Var { kind, index }
    }

    pub fn q(index: u8) -> Self {
        Var::new(VarKind::Q, index)
    }
    pub fn p(index: u8) -> Self {
        Var::new(VarKind::P, index)
    }
    pub fn l(index: u8) -> Self {
        Var::new(VarKind::L, index)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.index)
    }
}

/// Expression tree. Public constructors canonicalize; the enum itself makes
/// no canonicality promises.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Expr {
    Const(Q),
    ImagUnit,
    Var(Var),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Quot(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Q::zero())
    }
    pub fn one() -> Expr {
        Expr::Const(Q::one())
    }
    pub fn int(n: i64) -> Expr {
        Expr::Const(Q::from_integer(BigInt::from(n)))
    }
    pub fn rat(q: Q) -> Expr {
        Expr::Const(q)
    }
    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }
    pub fn i() -> Expr {
        Expr::ImagUnit
    }

    /// `re + im*i` with exact dyadic conversion of the f64 parts.
    pub fn complex_const(z: Complex64) -> Expr {
        let re = Expr::Const(q_from_f64(z.re).expect("non-finite constant"));
        let im = Expr::Const(q_from_f64(z.im).expect("non-finite constant"));
        canonicalize(Expr::Sum(vec![re, Expr::Prod(vec![im, Expr::ImagUnit])]))
    }

    pub fn scale(self, c: Q) -> Expr {
        canonicalize(Expr::Prod(vec![Expr::Const(c), self]))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) | Expr::ImagUnit => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Sum(xs) | Expr::Prod(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Expr::Quot(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Pow(b, _) => b.collect_vars(out),
            Expr::Exp(u) | Expr::Sin(u) | Expr::Cos(u) => u.collect_vars(out),
        }
    }

    /// True when no variable of the given kind occurs.
    pub fn is_free_of_kind(&self, kind: VarKind) -> bool {
        self.free_vars().iter().all(|v| v.kind != kind)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, other: Expr) -> Expr {
        canonicalize(Expr::Sum(vec![self, other]))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, other: Expr) -> Expr {
        canonicalize(Expr::Sum(vec![self, Expr::Prod(vec![Expr::int(-1), other])]))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, other: Expr) -> Expr {
        canonicalize(Expr::Prod(vec![self, other]))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        canonicalize(Expr::Prod(vec![Expr::int(-1), self]))
    }
}

// ---------------------------------------------------------------------------
// canonical form

/// Flatten, fold constants, merge powers, combine like terms and sort under
/// the derived node order. Idempotent.
pub fn canonicalize(e: Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::ImagUnit | Expr::Var(_) => e,
        Expr::Exp(u) => {
            let u = canonicalize(*u);
            if u.is_zero() {
                Expr::one()
            } else {
                Expr::Exp(Box::new(u))
            }
        }
        Expr::Sin(u) => {
            let u = canonicalize(*u);
            if u.is_zero() {
                Expr::zero()
            } else {
                Expr::Sin(Box::new(u))
            }
        }
        Expr::Cos(u) => {
            let u = canonicalize(*u);
            if u.is_zero() {
                Expr::one()
            } else {
                Expr::Cos(Box::new(u))
            }
        }
        Expr::Pow(b, k) => canon_pow(canonicalize(*b), k),
        // Quotients normalize to negative powers: a/b = a * b^-1. Division
        // by zero stays representable as 0^-1 and errors at evaluation.
        Expr::Quot(n, d) => {
            let n = canonicalize(*n);
            let d = canonicalize(*d);
            canon_prod(vec![n, Expr::Pow(Box::new(d), -1)])
        }
        Expr::Sum(ts) => canon_sum(ts),
        Expr::Prod(fs) => canon_prod(fs),
    }
}

/// Sum powers below this expand by repeated multiplication; above they stay
/// as `Pow` nodes (identical subtrees still compare equal).
const EXPAND_POW_LIMIT: i32 = 8;

fn canon_pow(base: Expr, k: i32) -> Expr {
    match (base, k) {
        (_, 0) => Expr::one(),
        (b, 1) => b,
        (Expr::Const(c), k) => {
            if c.is_zero() && k < 0 {
                Expr::Pow(Box::new(Expr::Const(c)), k) // division by zero: left for evaluation
            } else if k > 0 {
                Expr::Const(num_traits::pow::Pow::pow(c, k as u32))
            } else {
                Expr::Const(Q::one() / num_traits::pow::Pow::pow(c, (-k) as u32))
            }
        }
        (Expr::ImagUnit, k) => {
            let m = k.rem_euclid(4);
            match m {
                0 => Expr::one(),
                1 => Expr::ImagUnit,
                2 => Expr::int(-1),
                _ => canonicalize(Expr::Prod(vec![Expr::int(-1), Expr::ImagUnit])),
            }
        }
        (Expr::Pow(b2, k2), k) => canon_pow(*b2, k2.saturating_mul(k)),
        (Expr::Prod(fs), k) => canonicalize(Expr::Prod(
            fs.into_iter().map(|f| Expr::Pow(Box::new(f), k)).collect(),
        )),
        (Expr::Quot(n, d), k) => {
            canonicalize(Expr::Prod(vec![Expr::Pow(n, k), Expr::Pow(d, -k)]))
        }
        (Expr::Sum(ts), k) if (2..=EXPAND_POW_LIMIT).contains(&k) => {
            canon_prod(vec![Expr::Sum(ts); k as usize])
        }
        (b, k) => Expr::Pow(Box::new(b), k),
    }
}

/// Split a canonical term into `(rational coefficient, remaining factors)`.
fn split_coeff(term: Expr) -> (Q, Vec<Expr>) {
    match term {
        Expr::Const(c) => (c, vec![]),
        Expr::Prod(fs) => {
            let mut coeff = Q::one();
            let mut rest = Vec::with_capacity(fs.len());
            for f in fs {
                if let Expr::Const(c) = f {
                    coeff *= c;
                } else {
                    rest.push(f);
                }
            }
            (coeff, rest)
        }
        other => (Q::one(), vec![other]),
    }
}

fn rebuild_term(coeff: Q, rest: Vec<Expr>) -> Expr {
    if coeff.is_zero() {
        return Expr::zero();
    }
    if rest.is_empty() {
        return Expr::Const(coeff);
    }
    if coeff.is_one() {
        if rest.len() == 1 {
            return rest.into_iter().next().unwrap();
        }
        return Expr::Prod(rest);
    }
    let mut fs = Vec::with_capacity(rest.len() + 1);
    fs.push(Expr::Const(coeff));
    fs.extend(rest);
    Expr::Prod(fs)
}

fn canon_sum(ts: Vec<Expr>) -> Expr {
    let mut flat = Vec::new();
    for t in ts {
        match canonicalize(t) {
            Expr::Sum(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    // Combine like terms keyed by the non-constant factor list.
    let mut buckets: BTreeMap<Vec<Expr>, Q> = BTreeMap::new();
    for t in flat {
        let (coeff, rest) = split_coeff(t);
        *buckets.entry(rest).or_insert_with(Q::zero) += coeff;
    }
    let mut terms: Vec<Expr> = buckets
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(rest, coeff)| rebuild_term(coeff, rest))
        .collect();
    terms.sort();
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.into_iter().next().unwrap(),
        _ => Expr::Sum(terms),
    }
}

fn canon_prod(fs: Vec<Expr>) -> Expr {
    let mut flat = Vec::new();
    for f in fs {
        match canonicalize(f) {
            Expr::Prod(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut coeff = Q::one();
    let mut i_count: u32 = 0;
    let mut powers: Vec<(Expr, i32)> = Vec::new();
    for f in flat {
        match f {
            Expr::Const(c) => coeff *= c,
            Expr::ImagUnit => i_count += 1,
            Expr::Pow(b, k) => merge_power(&mut powers, *b, k),
            other => merge_power(&mut powers, other, 1),
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    if i_count % 4 >= 2 {
        coeff = -coeff;
    }
    let has_i = i_count % 2 == 1;

    // Distribute over sum factors with small positive exponents so that
    // polynomial identities cancel structurally.
    let mut sum_factors: Vec<Vec<Expr>> = Vec::new();
    let mut rest: Vec<Expr> = Vec::new();
    if has_i {
        rest.push(Expr::ImagUnit);
    }
    for (b, k) in powers {
        if k == 0 {
            continue;
        }
        if let Expr::Sum(ts) = &b {
            if (1..=EXPAND_POW_LIMIT).contains(&k) {
                for _ in 0..k {
                    sum_factors.push(ts.clone());
                }
                continue;
            }
        }
        rest.push(if k == 1 { b } else { canon_pow(b, k) });
    }
    if !sum_factors.is_empty() {
        let base = rebuild_term(coeff, {
            rest.sort();
            rest
        });
        let mut terms: Vec<Expr> = vec![base];
        for sum in sum_factors {
            let mut next = Vec::with_capacity(terms.len() * sum.len());
            for t in &terms {
                for s in &sum {
                    next.push(canon_prod(vec![t.clone(), s.clone()]));
                }
            }
            terms = next;
        }
        return canon_sum(terms);
    }
    rest.sort();
    rebuild_term(coeff, rest)
}

fn merge_power(powers: &mut Vec<(Expr, i32)>, base: Expr, k: i32) {
    for (b, e) in powers.iter_mut() {
        if *b == base {
            *e = e.saturating_add(k);
            return;
        }
    }
    powers.push((base, k));
}

// ---------------------------------------------------------------------------
// differentiation

/// Exact symbolic derivative with respect to `v`, canonicalized.
pub fn differentiate(e: &Expr, v: Var) -> Expr {
    canonicalize(d(e, v))
}

fn d(e: &Expr, v: Var) -> Expr {
    match e {
        Expr::Const(_) | Expr::ImagUnit => Expr::zero(),
        Expr::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(ts) => Expr::Sum(ts.iter().map(|t| d(t, v)).collect()),
        Expr::Prod(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let mut prod = fs.clone();
                prod[i] = d(&fs[i], v);
                terms.push(Expr::Prod(prod));
            }
            Expr::Sum(terms)
        }
        Expr::Quot(n, dd) => Expr::Quot(
            Box::new(Expr::Sum(vec![
                Expr::Prod(vec![d(n, v), (**dd).clone()]),
                Expr::Prod(vec![Expr::int(-1), (**n).clone(), d(dd, v)]),
            ])),
            Box::new(Expr::Pow(dd.clone(), 2)),
        ),
        Expr::Pow(b, k) => Expr::Prod(vec![
            Expr::int(*k as i64),
            Expr::Pow(b.clone(), k - 1),
            d(b, v),
        ]),
        Expr::Exp(u) => Expr::Prod(vec![Expr::Exp(u.clone()), d(u, v)]),
        Expr::Sin(u) => Expr::Prod(vec![Expr::Cos(u.clone()), d(u, v)]),
        Expr::Cos(u) => Expr::Prod(vec![Expr::int(-1), Expr::Sin(u.clone()), d(u, v)]),
    }
}

/// Replace every occurrence of `v` by `replacement`, canonicalized.
pub fn substitute(e: &Expr, v: Var, replacement: &Expr) -> Expr {
    canonicalize(subst(e, v, replacement))
}

fn subst(e: &Expr, v: Var, r: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::ImagUnit => e.clone(),
        Expr::Var(w) => {
            if *w == v {
                r.clone()
            } else {
                e.clone()
            }
        }
        Expr::Sum(ts) => Expr::Sum(ts.iter().map(|t| subst(t, v, r)).collect()),
        Expr::Prod(fs) => Expr::Prod(fs.iter().map(|f| subst(f, v, r)).collect()),
        Expr::Quot(a, b) => Expr::Quot(Box::new(subst(a, v, r)), Box::new(subst(b, v, r))),
        Expr::Pow(b, k) => Expr::Pow(Box::new(subst(b, v, r)), *k),
        Expr::Exp(u) => Expr::Exp(Box::new(subst(u, v, r))),
        Expr::Sin(u) => Expr::Sin(Box::new(subst(u, v, r))),
        Expr::Cos(u) => Expr::Cos(Box::new(subst(u, v, r))),
    }
}

// ---------------------------------------------------------------------------
// evaluation

/// Variable bindings for evaluation.
#[derive(Clone, Debug, Default)]
pub struct Binding {
    map: BTreeMap<Var, Complex64>,
}

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn set(&mut self, v: Var, z: Complex64) -> &mut Self {
        self.map.insert(v, z);
        self
    }

    pub fn set_real(&mut self, v: Var, x: f64) -> &mut Self {
        self.set(v, Complex64::new(x, 0.0))
    }

    pub fn get(&self, v: Var) -> Option<Complex64> {
        self.map.get(&v).copied()
    }

    /// Bind `q1..qn` from a slice of reals.
    pub fn with_q(mut self, q: &[f64]) -> Self {
        for (i, &x) in q.iter().enumerate() {
            self.set_real(Var::q(i as u8 + 1), x);
        }
        self
    }

    /// Bind `l1..ln` from a slice of reals.
    pub fn with_l(mut self, l: &[f64]) -> Self {
        for (i, &x) in l.iter().enumerate() {
            self.set_real(Var::l(i as u8 + 1), x);
        }
        self
    }

    /// Bind `p1..pn` from a slice of reals.
    pub fn with_p(mut self, p: &[f64]) -> Self {
        for (i, &x) in p.iter().enumerate() {
            self.set_real(Var::p(i as u8 + 1), x);
        }
        self
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(Var),
    #[error("division by zero at evaluation point")]
    DivisionByZero,
}

pub fn evaluate(e: &Expr, b: &Binding) -> Result<Complex64, EvalError> {
    match e {
        Expr::Const(c) => Ok(Complex64::new(
            c.to_f64().expect("rational constant out of f64 range"),
            0.0,
        )),
        Expr::ImagUnit => Ok(Complex64::new(0.0, 1.0)),
        Expr::Var(v) => b.get(*v).ok_or(EvalError::Unbound(*v)),
        Expr::Sum(ts) => {
            let mut acc = Complex64::ZERO;
            for t in ts {
                acc += evaluate(t, b)?;
            }
            Ok(acc)
        }
        Expr::Prod(fs) => {
            let mut acc = Complex64::ONE;
            for f in fs {
                acc *= evaluate(f, b)?;
            }
            Ok(acc)
        }
        Expr::Quot(n, d) => {
            let den = evaluate(d, b)?;
            if den == Complex64::ZERO {
                return Err(EvalError::DivisionByZero);
            }
            Ok(evaluate(n, b)? / den)
        }
        Expr::Pow(base, k) => {
            let z = evaluate(base, b)?;
            if z == Complex64::ZERO && *k < 0 {
                return Err(EvalError::DivisionByZero);
            }
            Ok(z.powi(*k))
        }
        Expr::Exp(u) => Ok(evaluate(u, b)?.exp()),
        Expr::Sin(u) => Ok(evaluate(u, b)?.sin()),
        Expr::Cos(u) => Ok(evaluate(u, b)?.cos()),
    }
}

// ---------------------------------------------------------------------------
// Poisson bracket

/// `{f, g} = sum_{a=1..n_pairs} (df/dq_a dg/dp_a - df/dp_a dg/dq_a)`,
/// canonicalized. The workbench-wide `bracket_sign` flag multiplies this
/// convention where transitions from the opposite convention are validated.
pub fn poisson_bracket(f: &Expr, g: &Expr, n_pairs: usize) -> Expr {
    let mut terms = Vec::with_capacity(2 * n_pairs);
    for a in 1..=n_pairs {
        let qa = Var::q(a as u8);
        let pa = Var::p(a as u8);
        terms.push(Expr::Prod(vec![d(f, qa), d(g, pa)]));
        terms.push(Expr::Prod(vec![Expr::int(-1), d(f, pa), d(g, qa)]));
    }
    canonicalize(Expr::Sum(terms))
}

// ---------------------------------------------------------------------------
// printing

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Sum(_) => 1,
        Expr::Prod(_) | Expr::Quot(_, _) => 2,
        Expr::Pow(_, _) => 3,
        _ => 4,
    }
}

fn fmt_with_parens(e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < min_prec {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

/// Structurally split a leading minus sign off a canonical term.
fn split_sign(term: &Expr) -> (bool, Expr) {
    match term {
        Expr::Const(c) if c.is_negative() => (true, Expr::Const(-c.clone())),
        Expr::Prod(fs) => {
            if let Some(Expr::Const(c)) = fs.first() {
                if c.is_negative() {
                    let mut rest = fs.clone();
                    rest[0] = Expr::Const(-c.clone());
                    return (true, canonicalize(Expr::Prod(rest)));
                }
            }
            (false, term.clone())
        }
        _ => (false, term.clone()),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::ImagUnit => write!(f, "i"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Sum(ts) => {
                for (k, t) in ts.iter().enumerate() {
                    let (neg, abs) = split_sign(t);
                    if k == 0 {
                        if neg {
                            write!(f, "-")?;
                        }
                    } else {
                        write!(f, " {} ", if neg { "-" } else { "+" })?;
                    }
                    fmt_with_parens(&abs, 2, f)?;
                }
                Ok(())
            }
            Expr::Prod(fs) => {
                for (k, x) in fs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    // Quotients are parenthesized inside products to keep
                    // left-associative reparsing faithful.
                    let need = if matches!(x, Expr::Quot(_, _)) { 5 } else { 2 };
                    fmt_with_parens(x, need, f)?;
                }
                Ok(())
            }
            Expr::Quot(n, d) => {
                fmt_with_parens(n, 2, f)?;
                write!(f, "/")?;
                fmt_with_parens(d, 3, f)
            }
            Expr::Pow(b, k) => {
                match **b {
                    Expr::Var(_) | Expr::Exp(_) | Expr::Sin(_) | Expr::Cos(_) => {
                        write!(f, "{b}")?;
                    }
                    _ => write!(f, "({b})")?,
                }
                write!(f, "^{k}")
            }
            Expr::Exp(u) => write!(f, "exp({u})"),
            Expr::Sin(u) => write!(f, "sin({u})"),
            Expr::Cos(u) => write!(f, "cos({u})"),
        }
    }
}

// ---------------------------------------------------------------------------
// parser

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = Vec::new();
        let mut sign = 1i64;
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                sign = -1;
            }
            Some(b'+') => {
                self.pos += 1;
            }
            _ => {}
        }
        let first = self.term()?;
        terms.push(if sign < 0 {
            Expr::Prod(vec![Expr::int(-1), first])
        } else {
            first
        });
        while let Some(op) = self.peek() {
            if op != b'+' && op != b'-' {
                break;
            }
            self.pos += 1;
            let t = self.term()?;
            terms.push(if op == b'-' {
                Expr::Prod(vec![Expr::int(-1), t])
            } else {
                t
            });
        }
        Ok(Expr::Sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        while let Some(op) = self.peek() {
            if op != b'*' && op != b'/' {
                break;
            }
            self.pos += 1;
            let rhs = self.factor()?;
            acc = if op == b'*' {
                Expr::Prod(vec![acc, rhs])
            } else {
                Expr::Quot(Box::new(acc), Box::new(rhs))
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.int_literal()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn int_literal(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut end = self.pos;
        if self.bytes.get(end) == Some(&b'-') {
            end += 1;
        }
        let digits_start = end;
        while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end == digits_start {
            return self.err(start, "exponent must be an integer literal");
        }
        let text = std::str::from_utf8(&self.bytes[start..end]).unwrap();
        self.pos = end;
        match text.parse::<i32>() {
            Ok(k) if k.unsigned_abs() <= MAX_EXPONENT as u32 => Ok(k),
            Ok(_) | Err(_) => self.err(start, format!("exponent out of range +-{MAX_EXPONENT}")),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return self.err(self.pos, "unexpected end of input");
        };
        let start = self.pos;
        match c {
            b'(' => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err(self.pos, "expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            b'-' => {
                // unary minus inside a parenthesized or function context
                self.pos += 1;
                let inner = self.base()?;
                Ok(Expr::Prod(vec![Expr::int(-1), inner]))
            }
            b'0'..=b'9' | b'.' => self.number(),
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = self.pos;
                while end < self.bytes.len()
                    && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
                {
                    end += 1;
                }
                let word = std::str::from_utf8(&self.bytes[self.pos..end]).unwrap();
                match word {
                    "i" => {
                        self.pos = end;
                        Ok(Expr::ImagUnit)
                    }
                    "exp" | "sin" | "cos" => {
                        self.pos = end;
                        if self.peek() != Some(b'(') {
                            return self.err(self.pos, format!("expected `(` after `{word}`"));
                        }
                        self.pos += 1;
                        let arg = self.expr()?;
                        if self.peek() != Some(b')') {
                            return self.err(self.pos, "expected `)`");
                        }
                        self.pos += 1;
                        Ok(match word {
                            "exp" => Expr::Exp(Box::new(arg)),
                            "sin" => Expr::Sin(Box::new(arg)),
                            _ => Expr::Cos(Box::new(arg)),
                        })
                    }
                    _ => {
                        let bytes = word.as_bytes();
                        let kind = match bytes[0] {
                            b'q' => Some(VarKind::Q),
                            b'p' => Some(VarKind::P),
                            b'l' => Some(VarKind::L),
                            _ => None,
                        };
                        if let Some(kind) = kind {
                            if bytes.len() == 2 && (b'1'..=b'9').contains(&bytes[1]) {
                                self.pos = end;
                                return Ok(Expr::Var(Var::new(kind, bytes[1] - b'0')));
                            }
                        }
                        self.err(start, format!("unknown identifier `{word}`"))
                    }
                }
            }
            other => self.err(start, format!("unexpected character `{}`", other as char)),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut end = self.pos;
        let mut seen_dot = false;
        while end < self.bytes.len() {
            match self.bytes[end] {
                b'0'..=b'9' => end += 1,
                b'.' if !seen_dot => {
                    seen_dot = true;
                    end += 1;
                }
                _ => break,
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..end]).unwrap();
        if text == "." || text.is_empty() {
            return self.err(start, "malformed number");
        }
        self.pos = end;
        let q = if let Some((int_part, frac_part)) = text.split_once('.') {
            let digits = format!("{int_part}{frac_part}");
            let num: BigInt = digits.parse().map_err(|_| ParseError {
                offset: start,
                message: "malformed number".into(),
            })?;
            let den = BigInt::from(10u32).pow(frac_part.len() as u32);
            Q::new(num, den)
        } else {
            Q::from_integer(text.parse().map_err(|_| ParseError {
                offset: start,
                message: "malformed number".into(),
            })?)
        };
        Ok(Expr::Const(q))
    }
}

/// Parse and canonicalize an expression string.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(ParseError {
            offset: p.pos,
            message: format!("unexpected trailing input `{}`", &text[p.pos..]),
        });
    }
    // A structurally zero constant denominator is a parse-level error.
    let canon = canonicalize(e);
    if find_zero_denominator(&canon).is_some() {
        return Err(ParseError { offset: 0, message: "division by constant zero".into() });
    }
    Ok(canon)
}

fn find_zero_denominator(e: &Expr) -> Option<()> {
    match e {
        Expr::Const(_) | Expr::ImagUnit | Expr::Var(_) => None,
        Expr::Sum(xs) | Expr::Prod(xs) => xs.iter().find_map(find_zero_denominator),
        Expr::Quot(n, d) => {
            if matches!(&**d, Expr::Const(c) if c.is_zero()) {
                return Some(());
            }
            find_zero_denominator(n).or_else(|| find_zero_denominator(d))
        }
        Expr::Pow(b, k) => {
            if *k < 0 && matches!(&**b, Expr::Const(c) if c.is_zero()) {
                return Some(());
            }
            find_zero_denominator(b)
        }
        Expr::Exp(u) | Expr::Sin(u) | Expr::Cos(u) => find_zero_denominator(u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::qr;
    use proptest::prelude::*;

    fn ev(e: &Expr, b: &Binding) -> Complex64 {
        evaluate(e, b).unwrap()
    }

    #[test]
    fn parse_basic_shapes() {
        let e = parse("q1^2 + l3*p1").unwrap();
        match &e {
            Expr::Sum(ts) => assert_eq!(ts.len(), 2),
            other => panic!("expected sum, got {other:?}"),
        }
        assert!(matches!(parse("exp(2*q1)").unwrap(), Expr::Exp(_)));
    }

    #[test]
    fn parse_error_offsets() {
        let err = parse("q1 + * p1").unwrap_err();
        assert_eq!(err.offset, 5);
        let err = parse("q12 + 1").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(err.message.contains("q12"));
        let err = parse("q1^q2").unwrap_err();
        assert!(err.message.contains("integer literal"));
        assert!(parse("x1").is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.5").unwrap(), Expr::Const(qr(1, 2)));
        assert_eq!(parse("2.25*q1").unwrap(), parse("9/4*q1").unwrap());
    }

    #[test]
    fn canonical_constant_folding() {
        assert_eq!(parse("1 - 1").unwrap(), Expr::zero());
        assert_eq!(parse("2*3/6").unwrap(), Expr::one());
        assert_eq!(parse("q1 + q1").unwrap(), parse("2*q1").unwrap());
        assert_eq!(parse("q1*q1").unwrap(), parse("q1^2").unwrap());
        assert_eq!(parse("i*i").unwrap(), Expr::int(-1));
        assert_eq!(parse("i^3").unwrap(), parse("-i").unwrap());
        assert_eq!(parse("q1 - q1").unwrap(), Expr::zero());
        assert_eq!(parse("l3*q1 - 2*(q1*l3)").unwrap(), parse("-l3*q1").unwrap());
    }

    #[test]
    fn zero_denominator_rejected_at_parse() {
        assert!(parse("1/0").is_err());
        assert!(parse("q1/(2-2)").is_err());
    }

    #[test]
    fn derivative_examples() {
        let e = parse("q1^2").unwrap();
        assert_eq!(differentiate(&e, Var::q(1)), parse("2*q1").unwrap());
        let e = parse("l3*q1*p1").unwrap();
        assert_eq!(differentiate(&e, Var::p(1)), parse("l3*q1").unwrap());
        let e = parse("exp(2*q1)").unwrap();
        assert_eq!(differentiate(&e, Var::q(1)), parse("2*exp(2*q1)").unwrap());
        let e = parse("sin(q1)").unwrap();
        assert_eq!(differentiate(&e, Var::q(1)), parse("cos(q1)").unwrap());
        let e = parse("cos(q1)").unwrap();
        assert_eq!(differentiate(&e, Var::q(1)), parse("-sin(q1)").unwrap());
        let e = parse("1/q1").unwrap();
        assert_eq!(
            differentiate(&e, Var::q(1)),
            parse("-1/q1^2").unwrap()
        );
    }

    #[test]
    fn evaluate_examples() {
        let mut b = Binding::new();
        b.set_real(Var::q(1), 2.0);
        assert_eq!(ev(&parse("q1^2").unwrap(), &b), Complex64::new(4.0, 0.0));
        let mut b = Binding::new();
        b.set_real(Var::l(3), 5.0);
        assert_eq!(ev(&parse("i*l3").unwrap(), &b), Complex64::new(0.0, 5.0));
        let mut b = Binding::new();
        b.set_real(Var::q(1), 0.0);
        assert_eq!(
            evaluate(&parse("1/q1").unwrap(), &b).unwrap_err(),
            EvalError::DivisionByZero
        );
        assert_eq!(
            evaluate(&parse("q1").unwrap(), &Binding::new()).unwrap_err(),
            EvalError::Unbound(Var::q(1))
        );
    }

    #[test]
    fn poisson_canonical_pairs() {
        let q1 = parse("q1").unwrap();
        let p1 = parse("p1").unwrap();
        assert_eq!(poisson_bracket(&q1, &p1, 1), Expr::one());
        assert_eq!(poisson_bracket(&p1, &q1, 1), Expr::int(-1));
        // h3 slice realization under the sign convention of this module:
        // {p1, -l3*q1} = l3.
        let f1 = parse("p1").unwrap();
        let f2 = parse("-l3*q1").unwrap();
        assert_eq!(poisson_bracket(&f1, &f2, 1), parse("l3").unwrap());
    }

    #[test]
    fn poisson_antisymmetry_structural() {
        let cases = [
            ("p1 + q1^2", "l3*q1*p1"),
            ("exp(q1)*p1", "sin(q1) + p1^2"),
            ("q1*q2 + p2", "p1*p2 + l1"),
        ];
        for (fs, gs) in cases {
            let f = parse(fs).unwrap();
            let g = parse(gs).unwrap();
            let fg = poisson_bracket(&f, &g, 2);
            let gf = poisson_bracket(&g, &f, 2);
            assert_eq!(fg, -gf, "{{{fs},{gs}}}");
        }
    }

    #[test]
    fn poisson_leibniz_numeric() {
        let f = parse("p1 + q1^2").unwrap();
        let g = parse("l3*q1").unwrap();
        let h = parse("exp(q1)*p1").unwrap();
        let gh = g.clone() * h.clone();
        let lhs = poisson_bracket(&f, &gh, 1);
        let rhs = poisson_bracket(&f, &g, 1) * h.clone()
            + g.clone() * poisson_bracket(&f, &h, 1);
        for k in 0..10 {
            let t = 0.13 + 0.17 * k as f64;
            let b = Binding::new().with_q(&[t]).with_p(&[1.0 - t]).with_l(&[0.0, 0.0, 2.0 + t]);
            let l = ev(&lhs, &b);
            let r = ev(&rhs, &b);
            assert!((l - r).norm() < 1e-9, "point {k}: {l} vs {r}");
        }
    }

    #[test]
    fn display_round_trips_fixture_strings() {
        let fixtures = [
            "q1^2 + l3*p1",
            "exp(2*q1)",
            "-l3*q1",
            "1/2*q1 - 3/4",
            "i*l3*q1",
            "(q1 + q2)^2",
            "q1/(q2 + 1)",
            "p1*q1/(q2 + 1)",
            "cos(q1)*sin(q2)",
            "q1^-2",
            "2/3",
            "-i*q1 + 5",
        ];
        for s in fixtures {
            let e = parse(s).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap_or_else(|err| {
                panic!("failed to reparse `{printed}` from `{s}`: {err}")
            });
            assert_eq!(reparsed, e, "`{s}` printed as `{printed}`");
        }
    }

    // Random canonical ASTs for property tests.
    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-6i64..=6).prop_map(Expr::int),
            (1i64..=4, 1i64..=5).prop_map(|(n, d)| Expr::rat(qr(n, d))),
            Just(Expr::i()),
            (0u8..2, 1u8..=2).prop_map(|(k, i)| {
                let kind = match k {
                    0 => VarKind::Q,
                    _ => VarKind::P,
                };
                Expr::Var(Var::new(kind, i))
            }),
            (1u8..=3).prop_map(|i| Expr::Var(Var::l(i))),
        ];
        leaf.prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Sum),
                prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::Prod),
                (inner.clone(), 2i32..=3).prop_map(|(b, k)| Expr::Pow(Box::new(b), k)),
                inner.clone().prop_map(|u| Expr::Exp(Box::new(u))),
                inner.clone().prop_map(|u| Expr::Sin(Box::new(u))),
                inner.prop_map(|u| Expr::Cos(Box::new(u))),
            ]
        })
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(e in arb_expr()) {
            let c = canonicalize(e);
            prop_assert_eq!(canonicalize(c.clone()), c);
        }

        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let c = canonicalize(e);
            let printed = c.to_string();
            let reparsed = parse(&printed);
            prop_assert!(reparsed.is_ok(), "unparseable `{}`", printed);
            prop_assert_eq!(reparsed.unwrap(), c, "printed `{}`", printed);
        }

        #[test]
        fn derivative_matches_finite_differences(e in arb_expr(), seed in 0u64..1000) {
            let c = canonicalize(e);
            let v = Var::q(1);
            let dc = differentiate(&c, v);
            // central differences at bounded real points; skip points where
            // the value is large (exp towers) to keep the FD step meaningful
            let mut checked = 0;
            for k in 0..10 {
                let x = -0.9 + 0.2 * k as f64 + (seed % 7) as f64 * 1e-3;
                let base = Binding::new()
                    .with_q(&[x, 0.37])
                    .with_p(&[0.21, -0.43])
                    .with_l(&[0.11, -0.72, 0.53]);
                let h = 1e-5;
                let mut bp = base.clone();
                bp.set_real(v, x + h);
                let mut bm = base.clone();
                bm.set_real(v, x - h);
                let (fp, fm, dv) = (ev(&c, &bp), ev(&c, &bm), ev(&dc, &base));
                if fp.norm() > 1e3 || fm.norm() > 1e3 {
                    continue;
                }
                let fd = (fp - fm) / (2.0 * h);
                let scale = 1.0_f64.max(dv.norm());
                prop_assert!(
                    (fd - dv).norm() / scale < 1e-4,
                    "x={} fd={} sym={} expr={}", x, fd, dv, c
                );
                checked += 1;
            }
            let _ = checked;
        }
    }

    #[test]
    fn substitute_shifts_lambda() {
        let e = parse("l3*q1").unwrap();
        let shifted = substitute(&e, Var::l(3), &parse("l3 + i*2").unwrap());
        assert_eq!(shifted, parse("l3*q1 + 2*i*q1").unwrap());
    }
}

//! Canonical-transition validation and lambda-representation operators.
//!
//! A transition realizes the coordinate functions on a coadjoint orbit in
//! Darboux coordinates as `f_X = sum_a alpha^a_X(q) p_a + chi_X(q, lambda)`.
//! Validation checks (numerically, at seeded sample points) that
//! `sign * {f_X, f_Y} = f_[X,Y]` and the base-point condition
//! `f_X(0, 0, lambda) = lambda_X`, plus constancy of supplied Casimirs under
//! the substitution `f -> f(q, p, lambda)`.
//!
//! Operators come from the quantization `l_X = i f_X(q, -i d_q, lambda)`,
//! i.e. `l_X = sum_a alpha^a_X(q) d_{q_a} + i chi_X(q, lambda)`. For p-linear
//! transitions this map obeys `[l_X, l_Y] = -sign * l_[X,Y]` exactly, so the
//! commutator check closes with `operator_closure_sign = -bracket_sign`.
//!
//! Sampling rule: lambda components are drawn at the indices supported by
//! the base point `lambda0` and held at zero elsewhere — transitions are
//! orbit-slice realizations and their defining identities are only meant to
//! hold on the slice through `lambda0`.

use crate::expr::{self, Binding, Expr, Var, VarKind};
use crate::liealg::LieAlgebraModel;
use crate::linalg::{self, Mat};
use crate::orbits::{self, CasimirPolynomial};
use crate::ratio::{Q, QC};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Per basis element `X`: `f_X = sum_a alpha[X][a] p_{a+1} + chi[X]`.
#[derive(Clone, Debug)]
pub struct CanonicalTransition {
    pub alpha: Vec<Vec<Expr>>,
    pub chi: Vec<Expr>,
    pub lambda0: Vec<Q>,
    pub n_pairs: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TransitionError {
    #[error("transition must supply alpha and chi for every basis element: expected {0}, found {1}")]
    WrongCount(usize, usize),
    #[error("alpha list for basis element {0} (1-based) has length {1}, expected n_pairs = {2}")]
    AlphaLength(usize, usize, usize),
    #[error("expression for basis element {0} (1-based) contains a p variable: {1}")]
    PDependence(usize, String),
    #[error("expression for basis element {0} (1-based) uses q{1} beyond n_pairs = {2}")]
    QIndexRange(usize, u8, usize),
    #[error("lambda0 must have length dim = {0}, found {1}")]
    Lambda0Length(usize, usize),
}

impl CanonicalTransition {
    /// Structural checks: counts, p-linearity (alpha and chi are p-free) and
    /// q-index ranges.
    pub fn check_structure(&self, model: &LieAlgebraModel) -> Result<(), TransitionError> {
        let dim = model.dim;
        if self.alpha.len() != dim || self.chi.len() != dim {
            return Err(TransitionError::WrongCount(dim, self.alpha.len().min(self.chi.len())));
        }
        if self.lambda0.len() != dim {
            return Err(TransitionError::Lambda0Length(dim, self.lambda0.len()));
        }
        for (x, (alphas, chi)) in self.alpha.iter().zip(self.chi.iter()).enumerate() {
            if alphas.len() != self.n_pairs {
                return Err(TransitionError::AlphaLength(x + 1, alphas.len(), self.n_pairs));
            }
            for e in alphas.iter().chain(std::iter::once(chi)) {
                for v in e.free_vars() {
                    match v.kind {
                        VarKind::P => {
                            return Err(TransitionError::PDependence(x + 1, e.to_string()))
                        }
                        VarKind::Q if v.index as usize > self.n_pairs => {
                            return Err(TransitionError::QIndexRange(x + 1, v.index, self.n_pairs))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// The symbol `f_X` as an expression.
    pub fn f_expr(&self, x: usize) -> Expr {
        let mut terms = vec![self.chi[x].clone()];
        for (a, alpha) in self.alpha[x].iter().enumerate() {
            terms.push(Expr::Prod(vec![alpha.clone(), Expr::Var(Var::p(a as u8 + 1))]));
        }
        expr::canonicalize(Expr::Sum(terms))
    }

    /// Indices (0-based) where the base point is nonzero; lambda sampling is
    /// supported there.
    pub fn lambda_support(&self) -> Vec<usize> {
        self.lambda0
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Options shared by the validation and commutator checks.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub bracket_sign: i32,
    pub tol: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { bracket_sign: 1, tol: DEFAULT_TOL, seed: orbits::DEFAULT_SEED }
    }
}

/// Worst bracket defect for one pair.
#[derive(Clone, Debug)]
pub struct PairResidual {
    pub x: usize,
    pub y: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct CasimirConstancy {
    pub casimir: String,
    pub value_at_lambda0: Q,
    pub max_deviation: f64,
}

/// Validation outcome; `pass` gates operator construction.
#[derive(Clone, Debug)]
pub struct TransitionReport {
    pub pass: bool,
    pub structurally_zero: bool,
    /// Max |sign*{f_X,f_Y} - f_[X,Y]| over sampled (q,p,lambda).
    pub max_bracket_residual: f64,
    /// Same defect evaluated with lambda pinned to the base point.
    pub base_bracket_residual: f64,
    pub worst_pair: Option<PairResidual>,
    /// Max |f_X(0,0,lambda) - lambda_X| over sampled lambda.
    pub base_point_residual: f64,
    pub casimir_constancy: Vec<CasimirConstancy>,
    pub bracket_sign: i32,
    pub tol: f64,
}

/// Proof token that a transition passed validation.
#[derive(Clone, Debug)]
pub struct ValidatedTransition {
    pub transition: CanonicalTransition,
    pub bracket_sign: i32,
}

fn sample_point(
    rng: &mut ChaCha8Rng,
    n_pairs: usize,
    dim: usize,
    support: &[usize],
    base: Option<&[Q]>,
) -> Binding {
    let mut b = Binding::new();
    for a in 1..=n_pairs {
        b.set_real(Var::q(a as u8), rng.random_range(-1.0..1.0));
        b.set_real(Var::p(a as u8), rng.random_range(-1.0..1.0));
    }
    for i in 0..dim {
        let v = Var::l(i as u8 + 1);
        match base {
            Some(l0) => {
                b.set_real(v, l0[i].to_f64().unwrap());
            }
            None if support.contains(&i) => {
                b.set_real(v, rng.random_range(-2.0..2.0));
            }
            None => {
                b.set_real(v, 0.0);
            }
        }
    }
    b
}

fn eval_abs(e: &Expr, b: &Binding) -> f64 {
    expr::evaluate(e, b).map(|z| z.norm()).unwrap_or(f64::INFINITY)
}

/// Validate a canonical transition against the structure constants; see the
/// module docs for the sampling rule.
pub fn validate_canonical_transition(
    model: &LieAlgebraModel,
    transition: &CanonicalTransition,
    casimirs: &[CasimirPolynomial],
    opts: &CheckOptions,
) -> Result<(TransitionReport, Option<ValidatedTransition>), TransitionError> {
    transition.check_structure(model)?;
    let dim = model.dim;
    let n_pairs = transition.n_pairs;
    let support = transition.lambda_support();
    let fs: Vec<Expr> = (0..dim).map(|x| transition.f_expr(x)).collect();
    let sign = Expr::int(opts.bracket_sign as i64);

    // Bracket defects sign*{f_X, f_Y} - sum_K C^K_XY f_K, canonicalized.
    let mut structurally_zero = true;
    let mut defects = Vec::new();
    for x in 0..dim {
        for y in (x + 1)..dim {
            let mut terms = vec![Expr::Prod(vec![
                sign.clone(),
                expr::poisson_bracket(&fs[x], &fs[y], n_pairs),
            ])];
            for k in 0..dim {
                let c = model.c(k, x, y);
                if !c.is_zero() {
                    terms.push(Expr::Prod(vec![Expr::rat(-c.clone()), fs[k].clone()]));
                }
            }
            let defect = expr::canonicalize(Expr::Sum(terms));
            if !defect.is_zero() {
                structurally_zero = false;
            }
            defects.push((x, y, defect));
        }
    }

    let mut max_bracket_residual: f64 = 0.0;
    let mut base_bracket_residual: f64 = 0.0;
    let mut worst_pair: Option<PairResidual> = None;
    for (x, y, defect) in &defects {
        let mut pair_max: f64 = 0.0;
        for s in 0..20 {
            let mut rng = seeded(opts.seed, 101 + s);
            let b = sample_point(&mut rng, n_pairs, dim, &support, None);
            pair_max = pair_max.max(eval_abs(defect, &b));
        }
        let mut base_max: f64 = 0.0;
        for s in 0..5 {
            let mut rng = seeded(opts.seed, 211 + s);
            let b = sample_point(&mut rng, n_pairs, dim, &support, Some(&transition.lambda0));
            base_max = base_max.max(eval_abs(defect, &b));
        }
        base_bracket_residual = base_bracket_residual.max(base_max);
        max_bracket_residual = max_bracket_residual.max(pair_max);
        let candidate = pair_max.max(base_max);
        if worst_pair.as_ref().is_none_or(|w| candidate > w.residual) {
            worst_pair = Some(PairResidual { x: *x, y: *y, residual: candidate });
        }
    }

    // Base-point condition f_X(0,0,lambda) = lambda_X at sampled lambda.
    let mut base_point_residual: f64 = 0.0;
    for s in 0..10 {
        let mut rng = seeded(opts.seed, 301 + s);
        let mut b = sample_point(&mut rng, n_pairs, dim, &support, None);
        for a in 1..=n_pairs {
            b.set_real(Var::q(a as u8), 0.0);
            b.set_real(Var::p(a as u8), 0.0);
        }
        for (x, f) in fs.iter().enumerate() {
            let lam = b.get(Var::l(x as u8 + 1)).unwrap();
            let val = expr::evaluate(f, &b).map_err(|_| ()).unwrap_or(Complex64::new(f64::NAN, 0.0));
            let r = (val - lam).norm();
            base_point_residual = base_point_residual.max(if r.is_nan() { f64::INFINITY } else { r });
        }
    }

    // Casimir compatibility: K(f(q,p,lambda)) constant in (q,p), equal to
    // K(lambda0) at the base point.
    let mut casimir_constancy = Vec::new();
    for c in casimirs {
        let reference = c.evaluate(&transition.lambda0);
        let ref_c = Complex64::new(reference.to_f64().unwrap(), 0.0);
        let mut max_dev: f64 = 0.0;
        for s in 0..10 {
            let mut rng = seeded(opts.seed, 401 + s);
            let b = sample_point(&mut rng, n_pairs, dim, &support, Some(&transition.lambda0));
            let mut acc = Complex64::ZERO;
            for (mono, coeff) in &c.terms {
                let mut term = Complex64::new(coeff.to_f64().unwrap(), 0.0);
                for (i, &e) in mono.0.iter().enumerate() {
                    for _ in 0..e {
                        term *= expr::evaluate(&fs[i], &b).unwrap_or(Complex64::new(f64::NAN, 0.0));
                    }
                }
                acc += term;
            }
            max_dev = max_dev.max((acc - ref_c).norm());
        }
        casimir_constancy.push(CasimirConstancy {
            casimir: c.to_string(),
            value_at_lambda0: reference,
            max_deviation: max_dev,
        });
    }

    let pass = max_bracket_residual <= opts.tol
        && base_bracket_residual <= opts.tol
        && base_point_residual <= opts.tol
        && casimir_constancy.iter().all(|c| c.max_deviation <= opts.tol);
    let report = TransitionReport {
        pass,
        structurally_zero,
        max_bracket_residual,
        base_bracket_residual,
        worst_pair,
        base_point_residual,
        casimir_constancy,
        bracket_sign: opts.bracket_sign,
        tol: opts.tol,
    };
    let validated = pass.then(|| ValidatedTransition {
        transition: transition.clone(),
        bracket_sign: opts.bracket_sign,
    });
    Ok((report, validated))
}

fn seeded(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// First-order operator `l_X = sum_a coeffs[a] d_{q_{a+1}} + zeroth`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaOperator {
    pub coeffs: Vec<Expr>,
    pub zeroth: Expr,
}

impl LambdaOperator {
    /// Apply to a function of `q` (and parameters), symbolically.
    pub fn apply(&self, psi: &Expr) -> Expr {
        let mut terms = vec![Expr::Prod(vec![self.zeroth.clone(), psi.clone()])];
        for (a, coeff) in self.coeffs.iter().enumerate() {
            terms.push(Expr::Prod(vec![
                coeff.clone(),
                expr::differentiate(psi, Var::q(a as u8 + 1)),
            ]));
        }
        expr::canonicalize(Expr::Sum(terms))
    }

    pub fn to_diff_operator(&self) -> DiffOperator {
        let n = self.coeffs.len();
        let mut terms = BTreeMap::new();
        if !self.zeroth.is_zero() {
            terms.insert(vec![0u8; n], self.zeroth.clone());
        }
        for (a, coeff) in self.coeffs.iter().enumerate() {
            if !coeff.is_zero() {
                let mut idx = vec![0u8; n];
                idx[a] = 1;
                terms.insert(idx, coeff.clone());
            }
        }
        DiffOperator { n_vars: n, terms }
    }
}

/// Build `l_X = sum_a alpha^a_X(q) d_{q_a} + i chi_X(q,lambda)` from a
/// validated transition (substituting `p_a -> -i d_{q_a}` into `f_X` and
/// multiplying by `i`). Optionally applies the quantum shift
/// `lambda -> lambda + i beta` to the zeroth-order parts.
pub fn build_operators(validated: &ValidatedTransition) -> Vec<LambdaOperator> {
    let t = &validated.transition;
    (0..t.chi.len())
        .map(|x| LambdaOperator {
            coeffs: t.alpha[x].clone(),
            zeroth: expr::canonicalize(Expr::Prod(vec![Expr::i(), t.chi[x].clone()])),
        })
        .collect()
}

/// Shift `l_A -> l_A + i beta_A` inside the zeroth-order parts.
pub fn apply_beta_shift(ops: &[LambdaOperator], beta: &[Q]) -> Vec<LambdaOperator> {
    ops.iter()
        .map(|op| {
            let mut zeroth = op.zeroth.clone();
            for (i, b) in beta.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let shifted = Expr::Sum(vec![
                    Expr::Var(Var::l(i as u8 + 1)),
                    Expr::Prod(vec![Expr::i(), Expr::rat(b.clone())]),
                ]);
                zeroth = expr::substitute(&zeroth, Var::l(i as u8 + 1), &shifted);
            }
            LambdaOperator { coeffs: op.coeffs.clone(), zeroth }
        })
        .collect()
}

/// Polynomial differential operator: finitely many terms `coeff(q) d^alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOperator {
    pub n_vars: usize,
    pub terms: BTreeMap<Vec<u8>, Expr>,
}

impl DiffOperator {
    pub fn zero(n_vars: usize) -> Self {
        DiffOperator { n_vars, terms: BTreeMap::new() }
    }

    pub fn identity(n_vars: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u8; n_vars], Expr::one());
        DiffOperator { n_vars, terms }
    }

    fn insert(&mut self, idx: Vec<u8>, e: Expr) {
        let entry = self.terms.entry(idx).or_insert_with(Expr::zero);
        *entry = expr::canonicalize(Expr::Sum(vec![entry.clone(), e]));
        if matches!(entry, Expr::Const(c) if c.is_zero()) {
            // keep the map sparse
            let key: Vec<Vec<u8>> = self
                .terms
                .iter()
                .filter(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &DiffOperator) -> DiffOperator {
        let mut out = self.clone();
        for (idx, e) in &other.terms {
            out.insert(idx.clone(), e.clone());
        }
        out
    }

    pub fn scale(&self, factor: &Expr) -> DiffOperator {
        let mut out = DiffOperator::zero(self.n_vars);
        for (idx, e) in &self.terms {
            out.insert(
                idx.clone(),
                expr::canonicalize(Expr::Prod(vec![factor.clone(), e.clone()])),
            );
        }
        out
    }

    pub fn sub(&self, other: &DiffOperator) -> DiffOperator {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Operator composition `self ∘ other` via the Leibniz rule:
    /// `d^a (b(q) d^b u) = sum_{g<=a} binom(a,g) (d^g b) d^{a-g+b} u`.
    pub fn compose(&self, other: &DiffOperator) -> DiffOperator {
        let n = self.n_vars;
        let mut out = DiffOperator::zero(n);
        for (alpha, a_coeff) in &self.terms {
            for (beta, b_coeff) in &other.terms {
                for gamma in multi_indices_below(alpha) {
                    let db = derive_multi(b_coeff, &gamma);
                    if db.is_zero() {
                        continue;
                    }
                    let binom = multi_binomial(alpha, &gamma);
                    let mut idx = vec![0u8; n];
                    for v in 0..n {
                        idx[v] = alpha[v] - gamma[v] + beta[v];
                    }
                    out.insert(
                        idx,
                        expr::canonicalize(Expr::Prod(vec![
                            Expr::int(binom),
                            a_coeff.clone(),
                            db,
                        ])),
                    );
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &DiffOperator) -> DiffOperator {
        self.compose(other).sub(&other.compose(self))
    }

    pub fn anticommutator(&self, other: &DiffOperator) -> DiffOperator {
        self.compose(other).add(&other.compose(self))
    }

    /// Apply to an expression in the `q` variables.
    pub fn apply(&self, psi: &Expr) -> Expr {
        let mut terms = Vec::new();
        for (idx, coeff) in &self.terms {
            terms.push(Expr::Prod(vec![coeff.clone(), derive_multi(psi, idx)]));
        }
        expr::canonicalize(Expr::Sum(terms))
    }

    /// Highest total derivative order.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|k| k.iter().map(|&x| x as u32).sum()).max().unwrap_or(0)
    }
}

fn derive_multi(e: &Expr, idx: &[u8]) -> Expr {
    let mut out = e.clone();
    for (v, &k) in idx.iter().enumerate() {
        for _ in 0..k {
            out = expr::differentiate(&out, Var::q(v as u8 + 1));
        }
    }
    out
}

fn multi_indices_below(alpha: &[u8]) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for &a in alpha {
        let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
        for prefix in &out {
            for g in 0..=a {
                let mut p = prefix.clone();
                p.push(g);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn multi_binomial(alpha: &[u8], gamma: &[u8]) -> i64 {
    fn binom(n: u8, k: u8) -> i64 {
        let mut acc = 1i64;
        for j in 0..k {
            acc = acc * (n as i64 - j as i64) / (j as i64 + 1);
        }
        acc
    }
    alpha.iter().zip(gamma.iter()).map(|(&a, &g)| binom(a, g)).product()
}

/// Residuals of the operator closure check
/// `[l_X, l_Y] = closure_sign * sum_K C^K_XY l_K` on the probe functions
/// `{1, q1, q1^2, exp(q1)}`.
#[derive(Clone, Debug)]
pub struct CommutatorReport {
    /// `-bracket_sign`: the closure sign implied by the validated convention.
    pub closure_sign: i32,
    pub max_residual: f64,
    /// Per ordered pair (x, y) with x < y: per-probe max residuals.
    pub pairs: Vec<CommutatorPair>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct CommutatorPair {
    pub x: usize,
    pub y: usize,
    pub probe_residuals: Vec<f64>,
}

pub fn probe_functions() -> Vec<Expr> {
    vec![
        Expr::one(),
        Expr::Var(Var::q(1)),
        expr::canonicalize(Expr::Pow(Box::new(Expr::Var(Var::q(1))), 2)),
        Expr::Exp(Box::new(Expr::Var(Var::q(1)))),
    ]
}

/// Check operator closure on the probes at seeded sample points. `lambda0`
/// fixes the lambda binding (operators are slice realizations); residuals
/// on probes are raw sup norms over the sampled points.
pub fn commutator_check(
    ops: &[LambdaOperator],
    model: &LieAlgebraModel,
    lambda0: &[Q],
    opts: &CheckOptions,
) -> CommutatorReport {
    let closure_sign = -opts.bracket_sign;
    let dim = model.dim;
    let n_pairs = ops.first().map(|o| o.coeffs.len()).unwrap_or(0);
    let dops: Vec<DiffOperator> = ops.iter().map(|o| o.to_diff_operator()).collect();
    let probes = probe_functions();
    let mut pairs = Vec::new();
    let mut max_residual: f64 = 0.0;
    for x in 0..dim {
        for y in (x + 1)..dim {
            let mut defect = dops[x].commutator(&dops[y]);
            for k in 0..dim {
                let c = model.c(k, x, y);
                if !c.is_zero() {
                    let coeff = expr::canonicalize(Expr::Prod(vec![
                        Expr::int(-closure_sign as i64),
                        Expr::rat(c.clone()),
                    ]));
                    defect = defect.add(&dops[k].scale(&coeff));
                }
            }
            let mut probe_residuals = Vec::with_capacity(probes.len());
            for probe in &probes {
                let image = defect.apply(probe);
                let mut r: f64 = 0.0;
                for s in 0..10 {
                    let mut rng = seeded(opts.seed, 501 + s);
                    let mut b = Binding::new();
                    for a in 1..=n_pairs.max(1) {
                        b.set_real(Var::q(a as u8), rng.random_range(-1.0..1.0));
                    }
                    for (i, l) in lambda0.iter().enumerate() {
                        b.set_real(Var::l(i as u8 + 1), l.to_f64().unwrap());
                    }
                    r = r.max(eval_abs(&image, &b));
                }
                max_residual = max_residual.max(r);
                probe_residuals.push(r);
            }
            pairs.push(CommutatorPair { x, y, probe_residuals });
        }
    }
    CommutatorReport {
        closure_sign,
        max_residual,
        pairs,
        tol: opts.tol,
        pass: max_residual <= opts.tol,
    }
}

// ---------------------------------------------------------------------------
// polarizations and the quantum shift

#[derive(Clone, Debug)]
pub struct PolarizationReport {
    pub closed: bool,
    pub closure_witness: Option<(usize, usize)>,
    pub expected_dim: usize,
    pub actual_dim: usize,
    pub isotropic: bool,
    pub isotropy_witness: Option<(usize, usize, QC)>,
    pub pass: bool,
}

fn bracket_qc(model: &LieAlgebraModel, u: &[QC], v: &[QC]) -> Vec<QC> {
    let n = model.dim;
    let mut out = vec![QC::zero(); n];
    for (a, o) in out.iter_mut().enumerate() {
        for b in 0..n {
            if u[b].is_zero() {
                continue;
            }
            for c in 0..n {
                if v[c].is_zero() {
                    continue;
                }
                let coeff = QC::from_q(model.c(a, b, c).clone());
                *o = o.clone() + coeff * u[b].clone() * v[c].clone();
            }
        }
    }
    out
}

/// Check that `n_basis` spans a polarization for `lambda`: a subalgebra of
/// the complexified algebra, isotropic for `<lambda,[.,.]>`, of dimension
/// `dim L - orbit_rank(lambda)/2`.
pub fn polarization_check(
    model: &LieAlgebraModel,
    lambda: &[Q],
    n_basis: &[Vec<QC>],
) -> PolarizationReport {
    let expected_dim = model.dim - orbits::orbit_rank(model, lambda) / 2;
    let (basis, pivots) = linalg::row_basis(&n_basis.to_vec());
    let actual_dim = basis.len();

    let mut closed = true;
    let mut closure_witness = None;
    let mut isotropic = true;
    let mut isotropy_witness = None;
    let lambda_qc: Vec<QC> = lambda.iter().map(|x| QC::from_q(x.clone())).collect();
    for i in 0..n_basis.len() {
        for j in (i + 1)..n_basis.len() {
            let br = bracket_qc(model, &n_basis[i], &n_basis[j]);
            if closed && linalg::coords_in_row_basis(&basis, &pivots, &br).is_none() {
                closed = false;
                closure_witness = Some((i, j));
            }
            let mut pairing = QC::zero();
            for (l, b) in lambda_qc.iter().zip(br.iter()) {
                pairing = pairing + l.clone() * b.clone();
            }
            if isotropic && !pairing.is_zero() {
                isotropic = false;
                isotropy_witness = Some((i, j, pairing));
            }
        }
    }
    let pass = closed && isotropic && actual_dim == expected_dim;
    PolarizationReport {
        closed,
        closure_witness,
        expected_dim,
        actual_dim,
        isotropic,
        isotropy_witness,
        pass,
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BetaError {
    #[error("l = n + conj(n) is not ad-stable for basis element {0} (1-based); restricted trace undefined")]
    NotStable(usize),
    #[error("quantum shift came out complex for basis element {0} (1-based)")]
    ComplexShift(usize),
}

/// Quantum shift `beta(e_A) = 1/2 [tr(ad_A) - tr(ad_A | l)]` with
/// `l = n + conj(n)`, exact Gaussian-rational arithmetic.
pub fn quantum_shift_beta(model: &LieAlgebraModel, n_basis: &[Vec<QC>]) -> Result<Vec<Q>, BetaError> {
    let dim = model.dim;
    let mut rows: Mat<QC> = Vec::new();
    for v in n_basis {
        rows.push(v.clone());
        rows.push(v.iter().map(|z| z.conj()).collect());
    }
    let (basis, pivots) = linalg::row_basis(&rows);
    let traces = crate::liealg::ad_trace_vector(model);
    let mut out = Vec::with_capacity(dim);
    for x in 0..dim {
        let ad = crate::liealg::adjoint_matrix(model, x).unwrap().m;
        let ad_qc: Mat<QC> = ad
            .iter()
            .map(|row| row.iter().map(|v| QC::from_q(v.clone())).collect())
            .collect();
        // restrict ad_x to l
        let mut restricted_trace = QC::zero();
        for (k, w) in basis.iter().enumerate() {
            let image = linalg::mat_vec(&ad_qc, w);
            let coords = linalg::coords_in_row_basis(&basis, &pivots, &image)
                .ok_or(BetaError::NotStable(x + 1))?;
            restricted_trace = restricted_trace + coords[k].clone();
        }
        let full = QC::from_q(traces[x].clone());
        let diff = full - restricted_trace;
        if !diff.im.is_zero() {
            return Err(BetaError::ComplexShift(x + 1));
        }
        out.push(diff.re / crate::ratio::qi(2));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Casimirs in the lambda representation

#[derive(Clone, Debug)]
pub struct CasimirRepReport {
    pub casimir: String,
    /// The constant `H(lambda0)` when the operator acts as multiplication.
    pub constant: Option<Complex64>,
    pub max_residual: f64,
    pub is_constant: bool,
}

/// Substitute `l_X` for `f_X` in a Casimir polynomial (monomials compose
/// left-to-right, no symmetrization) and test whether the resulting operator
/// is multiplication by a constant on the probe functions.
pub fn casimir_in_lambda_rep(
    casimir: &CasimirPolynomial,
    ops: &[LambdaOperator],
    lambda0: &[Q],
    opts: &CheckOptions,
) -> CasimirRepReport {
    let n_pairs = ops.first().map(|o| o.coeffs.len()).unwrap_or(0);
    let dops: Vec<DiffOperator> = ops.iter().map(|o| o.to_diff_operator()).collect();
    let mut total = DiffOperator::zero(n_pairs);
    for (mono, coeff) in &casimir.terms {
        let mut factor: Option<DiffOperator> = None;
        for (i, &e) in mono.0.iter().enumerate() {
            for _ in 0..e {
                factor = Some(match factor {
                    None => dops[i].clone(),
                    Some(f) => f.compose(&dops[i]),
                });
            }
        }
        let term = factor.unwrap_or_else(|| DiffOperator::identity(n_pairs));
        total = total.add(&term.scale(&Expr::rat(coeff.clone())));
    }

    let binding_for = |s: u64| {
        let mut rng = seeded(opts.seed, 601 + s);
        let mut b = Binding::new();
        for a in 1..=n_pairs.max(1) {
            b.set_real(Var::q(a as u8), rng.random_range(-1.0..1.0));
        }
        for (i, l) in lambda0.iter().enumerate() {
            b.set_real(Var::l(i as u8 + 1), l.to_f64().unwrap());
        }
        b
    };

    // Candidate constant from the constant probe.
    let probes = probe_functions();
    let image_one = total.apply(&probes[0]);
    let candidate = expr::evaluate(&image_one, &binding_for(0)).ok();
    let Some(c) = candidate else {
        return CasimirRepReport {
            casimir: casimir.to_string(),
            constant: None,
            max_residual: f64::INFINITY,
            is_constant: false,
        };
    };
    let mut max_residual: f64 = 0.0;
    for probe in &probes {
        let image = total.apply(probe);
        for s in 0..10 {
            let b = binding_for(s);
            let lhs = expr::evaluate(&image, &b);
            let rhs = expr::evaluate(probe, &b).map(|v| c * v);
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => max_residual = max_residual.max((l - r).norm()),
                _ => max_residual = f64::INFINITY,
            }
        }
    }
    let is_constant = max_residual <= opts.tol;
    CasimirRepReport {
        casimir: casimir.to_string(),
        constant: is_constant.then_some(c),
        max_residual,
        is_constant,
    }
}

/// Quadrature check that `(l_X phi, psi) + (phi, l_X psi) ~ 0` under the
/// supplied measure, for Gaussian-decaying probe pairs. Reported, not
/// enforced: boundary terms depend on the geometry of `Q`.
pub fn anti_hermiticity_residual(
    ops: &[LambdaOperator],
    nodes: &[Vec<f64>],
    weights: &[f64],
    lambda0: &[Q],
) -> f64 {
    let n_pairs = ops.first().map(|o| o.coeffs.len()).unwrap_or(0);
    if n_pairs == 0 {
        // multiplication operators: anti-Hermitian iff purely imaginary;
        // check directly on the single probe value.
        let mut worst: f64 = 0.0;
        let b = lambda_binding(lambda0);
        for op in ops {
            if let Ok(z) = expr::evaluate(&op.zeroth, &b) {
                worst = worst.max((z + z.conj()).norm());
            }
        }
        return worst;
    }
    // probes: exp(-|q|^2), q1 exp(-|q|^2), exp(-|q|^2 + q1)
    let gauss = {
        let mut terms = Vec::new();
        for a in 1..=n_pairs {
            terms.push(Expr::Prod(vec![
                Expr::int(-1),
                Expr::Pow(Box::new(Expr::Var(Var::q(a as u8))), 2),
            ]));
        }
        expr::canonicalize(Expr::Exp(Box::new(Expr::Sum(terms))))
    };
    let probes = [
        gauss.clone(),
        expr::canonicalize(Expr::Prod(vec![Expr::Var(Var::q(1)), gauss.clone()])),
        expr::canonicalize(Expr::Prod(vec![Expr::Exp(Box::new(Expr::Var(Var::q(1)))), gauss])),
    ];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut worst: f64 = 0.0;
    for op in ops {
        for (i, j) in pairs {
            let phi = &probes[i];
            let psi = &probes[j];
            let lphi = op.apply(phi);
            let lpsi = op.apply(psi);
            let mut acc = Complex64::ZERO;
            for (node, w) in nodes.iter().zip(weights.iter()) {
                let mut b = lambda_binding(lambda0);
                for (a, &x) in node.iter().enumerate() {
                    b.set_real(Var::q(a as u8 + 1), x);
                }
                let (Ok(p), Ok(s), Ok(lp), Ok(ls)) = (
                    expr::evaluate(phi, &b),
                    expr::evaluate(psi, &b),
                    expr::evaluate(&lphi, &b),
                    expr::evaluate(&lpsi, &b),
                ) else {
                    return f64::INFINITY;
                };
                acc += *w * (lp.conj() * s + p.conj() * ls);
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

fn lambda_binding(lambda0: &[Q]) -> Binding {
    let mut b = Binding::new();
    for (i, l) in lambda0.iter().enumerate() {
        b.set_real(Var::l(i as u8 + 1), l.to_f64().unwrap());
    }
    b
}

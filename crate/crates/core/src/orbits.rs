//! Coadjoint-orbit analysis on the dual space: orbit rank at a covector,
//! algebra index, stratification by orbit dimension, polynomial Casimir
//! search, the Kirillov form, and the defect of the homogeneous space.
//!
//! Ranks are exact (rational elimination). Generic-rank suprema are taken
//! over a deterministic seeded sample plus all coordinate covectors and the
//! zero covector; exactness means the supremum can only be underestimated on
//! a measure-zero set of seeds (probabilistic-complete).

use crate::liealg::LieAlgebraModel;
use crate::linalg::{self, Mat};
use crate::ratio::{qi, Q};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;

/// Number of pseudo-random covectors sampled for generic-rank suprema.
pub const SAMPLE_COUNT: usize = 32;
/// Default seed for the deterministic sampling.
pub const DEFAULT_SEED: u64 = 0x6b6f7262;
/// Default cap on the Casimir search degree.
pub const DEFAULT_MAX_DEGREE: u32 = 4;

/// The matrix `M_AB(lambda) = sum_K C^K_AB lambda_K`.
pub fn orbit_matrix(model: &LieAlgebraModel, lambda: &[Q]) -> Mat<Q> {
    let n = model.dim;
    assert_eq!(lambda.len(), n, "covector length must equal dim");
    let mut m = linalg::zeros::<Q>(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut s = Q::zero();
            for k in 0..n {
                if !lambda[k].is_zero() {
                    s += model.c(k, a, b) * &lambda[k];
                }
            }
            m[a][b] = s;
        }
    }
    m
}

/// Rank of the Kirillov matrix at `lambda` = dimension of the orbit through
/// it. Always even (the matrix is antisymmetric).
pub fn orbit_rank(model: &LieAlgebraModel, lambda: &[Q]) -> usize {
    let r = linalg::rank(&orbit_matrix(model, lambda));
    debug_assert!(r.is_multiple_of(2), "antisymmetric matrix must have even rank");
    r
}

/// Kirillov form `omega_ij = <lambda, [e_i, e_j]>` over the chosen
/// directions (0-based basis indices). Antisymmetric by construction.
pub fn kirillov_form(model: &LieAlgebraModel, lambda: &[Q], directions: &[usize]) -> Mat<Q> {
    let m = orbit_matrix(model, lambda);
    directions
        .iter()
        .map(|&i| directions.iter().map(|&j| m[i][j].clone()).collect())
        .collect()
}

fn sample_rational(rng: &mut ChaCha8Rng) -> Q {
    // Entries in [-9, 9] with denominators <= 7.
    let num = rng.random_range(-9i64..=9);
    let den = rng.random_range(1i64..=7);
    Q::new(BigInt::from(num), BigInt::from(den))
}

fn seeded_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Deterministic covector probes: zero, all coordinate covectors, then
/// `SAMPLE_COUNT` seeded pseudo-random covectors (per-sample-index seeding).
pub fn sample_covectors(model: &LieAlgebraModel, seed: u64) -> Vec<Vec<Q>> {
    let n = model.dim;
    let mut out = Vec::with_capacity(1 + n + SAMPLE_COUNT);
    out.push(vec![Q::zero(); n]);
    for i in 0..n {
        let mut v = vec![Q::zero(); n];
        v[i] = Q::one();
        out.push(v);
    }
    for s in 0..SAMPLE_COUNT {
        let mut rng = seeded_rng(seed, s);
        out.push((0..n).map(|_| sample_rational(&mut rng)).collect());
    }
    out
}

/// `ind L = dim L - max rank` over the sampled covectors.
pub fn algebra_index(model: &LieAlgebraModel, seed: u64) -> usize {
    let max_rank = sample_covectors(model, seed)
        .iter()
        .map(|l| orbit_rank(model, l))
        .max()
        .unwrap_or(0);
    model.dim - max_rank
}

/// An orbit stratum: all sampled covectors whose orbits share one dimension
/// `orbit_dim = dim L - ind L - 2s`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitStratum {
    pub s: usize,
    pub orbit_dim: usize,
    pub sample_points: Vec<Vec<Q>>,
}

/// Group the sampled covectors by orbit dimension; strata sorted by `s`.
pub fn stratify(model: &LieAlgebraModel, seed: u64) -> Vec<OrbitStratum> {
    let ind = algebra_index(model, seed);
    let mut by_rank: BTreeMap<usize, Vec<Vec<Q>>> = BTreeMap::new();
    for l in sample_covectors(model, seed) {
        let r = orbit_rank(model, &l);
        let bucket = by_rank.entry(r).or_default();
        if bucket.len() < 3 {
            bucket.push(l);
        }
    }
    let mut strata: Vec<OrbitStratum> = by_rank
        .into_iter()
        .map(|(rank, sample_points)| OrbitStratum {
            s: (model.dim - ind - rank) / 2,
            orbit_dim: rank,
            sample_points,
        })
        .collect();
    strata.sort_by_key(|st| st.s);
    strata
}

/// Monomial in the coordinates `f_1..f_dim`, stored as an exponent vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Graded-lex order with `f_1 > f_2 > ...`: compare total degree first, then
/// exponent vectors lexicographically. Sorts the LARGEST monomial first,
/// which is what the canonical printing and pivoting use.
pub fn cmp_graded_lex_desc(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    b.degree().cmp(&a.degree()).then_with(|| b.0.cmp(&a.0))
}

/// Polynomial Casimir candidate with rational coefficients, keyed by
/// monomials in graded-lex-descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct CasimirPolynomial {
    /// `(monomial, coefficient)` pairs, graded-lex descending, no zeros.
    pub terms: Vec<(Monomial, Q)>,
}

impl CasimirPolynomial {
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Value at a covector, exact.
    pub fn evaluate(&self, lambda: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (mono, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (i, &e) in mono.0.iter().enumerate() {
                for _ in 0..e {
                    term *= &lambda[i];
                }
            }
            acc += term;
        }
        acc
    }
}

impl fmt::Display for CasimirPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (mono, coeff)) in self.terms.iter().enumerate() {
            let neg = coeff < &Q::zero();
            let mag = if neg { -coeff.clone() } else { coeff.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let vars: Vec<String> = mono
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("f{}", i + 1)
                    } else {
                        format!("f{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CasimirError {
    #[error("requested degree {0} exceeds the configured cap {1}")]
    DegreeCapExceeded(u32, u32),
    #[error("max_degree must be at least 1")]
    ZeroDegree,
}

fn monomials_up_to(n_vars: usize, max_degree: u32, zero_vars: &[usize]) -> Vec<Monomial> {
    // All monomials of degree 1..=max_degree avoiding the zeroed variables,
    // sorted graded-lex descending.
    fn rec(
        var: usize,
        remaining: u32,
        current: &mut Vec<u32>,
        zero_vars: &[usize],
        out: &mut Vec<Monomial>,
    ) {
        if var == current.len() {
            if current.iter().any(|&e| e > 0) {
                out.push(Monomial(current.clone()));
            }
            return;
        }
        let cap = if zero_vars.contains(&var) { 0 } else { remaining };
        for e in 0..=cap {
            current[var] = e;
            rec(var + 1, remaining - e, current, zero_vars, out);
        }
        current[var] = 0;
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; n_vars];
    rec(0, max_degree, &mut current, zero_vars, &mut out);
    out.sort_by(cmp_graded_lex_desc);
    out
}

/// The coefficient polynomials of the commutation condition
/// `sum_J sum_K C^K_IJ f_K dP/df_J` for a single monomial `P`, one condition
/// polynomial per `I`, optionally restricted to the coordinate hyperplane
/// `f_K = 0` for `K` in `zero_vars`.
fn condition_terms(
    model: &LieAlgebraModel,
    mono: &Monomial,
    zero_vars: &[usize],
) -> Vec<BTreeMap<Vec<u32>, Q>> {
    let n = model.dim;
    let mut conds = vec![BTreeMap::new(); n];
    for j in 0..n {
        let e_j = mono.0[j];
        if e_j == 0 {
            continue;
        }
        // d(mono)/df_j = e_j * mono with the exponent of f_j reduced by one.
        let mut dmono = mono.0.clone();
        dmono[j] -= 1;
        for (i, cond) in conds.iter_mut().enumerate() {
            for k in 0..n {
                let c = model.c(k, i, j);
                if c.is_zero() || zero_vars.contains(&k) {
                    continue;
                }
                let mut prod = dmono.clone();
                prod[k] += 1;
                let coeff = c * qi(e_j as i64);
                *cond.entry(prod).or_insert_with(Q::zero) += coeff;
            }
        }
    }
    conds
}

/// Search for a canonical basis of polynomial Casimirs of degree
/// `1..=max_degree`: solve the linear system demanding the commutation
/// condition vanish identically, then put the solution space in reduced row
/// echelon form over graded-lex-ordered monomial coordinates (each basis
/// polynomial has leading coefficient 1).
pub fn find_casimirs(
    model: &LieAlgebraModel,
    max_degree: u32,
    cap: u32,
) -> Result<Vec<CasimirPolynomial>, CasimirError> {
    find_casimirs_on_hyperplane(model, max_degree, cap, &[])
}

/// Same as [`find_casimirs`] but restricted to the coordinate hyperplane
/// `f_K = 0` for `K` in `zero_vars` (0-based): candidate monomials avoid
/// those variables and the commutation conditions are evaluated on the
/// hyperplane. This realizes (s)-type Casimirs on coordinate strata.
pub fn find_casimirs_on_hyperplane(
    model: &LieAlgebraModel,
    max_degree: u32,
    cap: u32,
    zero_vars: &[usize],
) -> Result<Vec<CasimirPolynomial>, CasimirError> {
    if max_degree == 0 {
        return Err(CasimirError::ZeroDegree);
    }
    if max_degree > cap {
        return Err(CasimirError::DegreeCapExceeded(max_degree, cap));
    }
    let n = model.dim;
    let candidates = monomials_up_to(n, max_degree, zero_vars);
    // Matrix of the linear map (candidate coefficients) -> (stacked
    // condition-polynomial coefficients), one row per (I, monomial).
    let mut row_index: BTreeMap<(usize, Vec<u32>), usize> = BTreeMap::new();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for (col, mono) in candidates.iter().enumerate() {
        let conds = condition_terms(model, mono, zero_vars);
        for (i, cond) in conds.into_iter().enumerate() {
            for (prod, coeff) in cond {
                if coeff.is_zero() {
                    continue;
                }
                let next = row_index.len();
                let r = *row_index.entry((i, prod)).or_insert(next);
                if r == rows.len() {
                    rows.push(vec![Q::zero(); candidates.len()]);
                }
                rows[r][col] += coeff;
            }
        }
    }
    let basis = if rows.is_empty() {
        // Everything commutes: the full candidate space.
        linalg::identity::<Q>(candidates.len())
    } else {
        linalg::nullspace(&rows)
    };
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    // Canonicalize: RREF over graded-lex-descending monomial coordinates.
    let (reduced, pivots) = linalg::row_basis(&basis);
    let mut out = Vec::new();
    for row in reduced.iter() {
        let terms: Vec<(Monomial, Q)> = row
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (candidates[j].clone(), c.clone()))
            .collect();
        out.push(CasimirPolynomial { terms });
    }
    debug_assert_eq!(pivots.len(), out.len());
    Ok(out)
}

/// Exact symbolic re-verification of the commutation identity for a
/// polynomial: returns the violated `(I, monomial)` pairs (empty = Casimir).
pub fn verify_casimir(
    model: &LieAlgebraModel,
    casimir: &CasimirPolynomial,
) -> Vec<(usize, Monomial)> {
    verify_casimir_on_hyperplane(model, casimir, &[])
}

pub fn verify_casimir_on_hyperplane(
    model: &LieAlgebraModel,
    casimir: &CasimirPolynomial,
    zero_vars: &[usize],
) -> Vec<(usize, Monomial)> {
    let n = model.dim;
    let mut acc: Vec<BTreeMap<Vec<u32>, Q>> = vec![BTreeMap::new(); n];
    for (mono, coeff) in &casimir.terms {
        let conds = condition_terms(model, mono, zero_vars);
        for (i, cond) in conds.into_iter().enumerate() {
            for (prod, c) in cond {
                *acc[i].entry(prod).or_insert_with(Q::zero) += c * coeff;
            }
        }
    }
    let mut violations = Vec::new();
    for (i, cond) in acc.into_iter().enumerate() {
        for (prod, c) in cond {
            if !c.is_zero() {
                violations.push((i, Monomial(prod)));
            }
        }
    }
    violations
}

/// Infinitesimal coadjoint invariance at a point: for all `I`,
/// `sum_{J,K} C^K_IJ lambda_K (dP/df_J)(lambda) = 0`, exact.
pub fn infinitesimal_invariance_at(
    model: &LieAlgebraModel,
    casimir: &CasimirPolynomial,
    lambda: &[Q],
) -> bool {
    let n = model.dim;
    let m = orbit_matrix(model, lambda);
    let mut grad = vec![Q::zero(); n];
    for (mono, coeff) in &casimir.terms {
        for j in 0..n {
            if mono.0[j] == 0 {
                continue;
            }
            let mut term = coeff * qi(mono.0[j] as i64);
            for (i, &e) in mono.0.iter().enumerate() {
                let pow = if i == j { e - 1 } else { e };
                for _ in 0..pow {
                    term *= &lambda[i];
                }
            }
            grad[j] += term;
        }
    }
    (0..n).all(|i| {
        let mut s = Q::zero();
        for j in 0..n {
            s += &m[i][j] * &grad[j];
        }
        s.is_zero()
    })
}

/// Defect report: the two suprema and their witnesses.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectReport {
    pub defect: i64,
    pub sup_rank_full: usize,
    pub sup_rank_h_block: usize,
    pub witness_full: Vec<Q>,
    pub witness_h_block: Vec<Q>,
}

/// `d_P = 1/2 sup rank <lambda,[L,L]> - sup rank <lambda,[L,h]>` with both
/// suprema over sampled `lambda` vanishing on the `h`-indices.
pub fn defect(model: &LieAlgebraModel, seed: u64) -> DefectReport {
    let n = model.dim;
    let h = model.subalgebra_h();
    let mut sup_full = 0usize;
    let mut sup_block = 0usize;
    let mut wit_full = vec![Q::zero(); n];
    let mut wit_block = vec![Q::zero(); n];
    for mut l in sample_covectors(model, seed) {
        for &i in h {
            l[i] = Q::zero();
        }
        let m = orbit_matrix(model, &l);
        let r_full = linalg::rank(&m);
        if r_full > sup_full {
            sup_full = r_full;
            wit_full = l.clone();
        }
        if !h.is_empty() {
            let block: Mat<Q> = m
                .iter()
                .map(|row| h.iter().map(|&j| row[j].clone()).collect())
                .collect();
            let r_block = linalg::rank(&block);
            if r_block > sup_block {
                sup_block = r_block;
                wit_block = l.clone();
            }
        }
    }
    DefectReport {
        defect: (sup_full / 2) as i64 - sup_block as i64,
        sup_rank_full: sup_full,
        sup_rank_h_block: sup_block,
        witness_full: wit_full,
        witness_h_block: wit_block,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ratio::qr;

    fn l(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn orbit_ranks_h3() {
        let h3 = catalog::heisenberg3();
        assert_eq!(orbit_rank(&h3, &l(&[0, 0, 1])), 2);
        assert_eq!(orbit_rank(&h3, &l(&[1, 1, 0])), 0);
    }

    #[test]
    fn orbit_rank_su2() {
        assert_eq!(orbit_rank(&catalog::su2(), &l(&[0, 0, 1])), 2);
    }

    #[test]
    fn orbit_rank_always_even_on_random_covectors() {
        for model in catalog::all_fixtures() {
            for s in 0..100 {
                let mut rng = seeded_rng(7, s);
                let lam: Vec<Q> = (0..model.dim).map(|_| sample_rational(&mut rng)).collect();
                assert_eq!(orbit_rank(&model, &lam) % 2, 0, "{}", model.name);
            }
        }
    }

    #[test]
    fn indices_of_fixtures() {
        assert_eq!(algebra_index(&catalog::heisenberg3(), DEFAULT_SEED), 1);
        assert_eq!(algebra_index(&catalog::su2(), DEFAULT_SEED), 1);
        assert_eq!(algebra_index(&catalog::abelian(2), DEFAULT_SEED), 2);
        assert_eq!(algebra_index(&catalog::solvable2(), DEFAULT_SEED), 0);
    }

    #[test]
    fn dim_minus_index_is_even_and_strata_consistent() {
        for model in catalog::all_fixtures() {
            let ind = algebra_index(&model, DEFAULT_SEED);
            assert_eq!((model.dim - ind) % 2, 0, "{}", model.name);
            for st in stratify(&model, DEFAULT_SEED) {
                assert_eq!(st.orbit_dim, model.dim - ind - 2 * st.s, "{}", model.name);
                for p in &st.sample_points {
                    assert_eq!(orbit_rank(&model, p), st.orbit_dim);
                }
            }
        }
    }

    #[test]
    fn strata_of_h3_su2_abelian() {
        let st = stratify(&catalog::heisenberg3(), DEFAULT_SEED);
        let dims: Vec<(usize, usize)> = st.iter().map(|s| (s.s, s.orbit_dim)).collect();
        assert_eq!(dims, vec![(0, 2), (1, 0)]);

        let st = stratify(&catalog::abelian(3), DEFAULT_SEED);
        assert_eq!(st.len(), 1);
        assert_eq!((st[0].s, st[0].orbit_dim), (0, 0));

        let st = stratify(&catalog::su2(), DEFAULT_SEED);
        let dims: Vec<(usize, usize)> = st.iter().map(|s| (s.s, s.orbit_dim)).collect();
        assert_eq!(dims, vec![(0, 2), (1, 0)]);
        // the degenerate stratum contains the zero covector
        assert!(st[1].sample_points.contains(&l(&[0, 0, 0])));
    }

    #[test]
    fn casimirs_h3_degree1() {
        let cs = find_casimirs(&catalog::heisenberg3(), 1, DEFAULT_MAX_DEGREE).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].to_string(), "f3");
    }

    #[test]
    fn casimirs_su2_degree2() {
        let cs = find_casimirs(&catalog::su2(), 2, DEFAULT_MAX_DEGREE).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].to_string(), "f1^2 + f2^2 + f3^2");
        assert_eq!(cs[0].degree(), 2);
    }

    #[test]
    fn casimirs_abelian_degree1() {
        let cs = find_casimirs(&catalog::abelian(3), 1, DEFAULT_MAX_DEGREE).unwrap();
        let printed: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        assert_eq!(printed, vec!["f1", "f2", "f3"]);
    }

    #[test]
    fn found_casimirs_reverify_exactly() {
        for model in catalog::all_fixtures() {
            for deg in 1..=3 {
                for c in find_casimirs(&model, deg, DEFAULT_MAX_DEGREE).unwrap() {
                    assert!(verify_casimir(&model, &c).is_empty(), "{} deg {}", model.name, deg);
                }
            }
        }
    }

    #[test]
    fn degree_cap_enforced() {
        assert_eq!(
            find_casimirs(&catalog::su2(), 5, 4).unwrap_err(),
            CasimirError::DegreeCapExceeded(5, 4)
        );
        assert_eq!(find_casimirs(&catalog::su2(), 0, 4).unwrap_err(), CasimirError::ZeroDegree);
    }

    #[test]
    fn evaluate_casimir_values() {
        let h3 = catalog::heisenberg3();
        let f3 = &find_casimirs(&h3, 1, 4).unwrap()[0];
        assert_eq!(f3.evaluate(&l(&[1, 0, 0])), qi(0));
        let su2 = catalog::su2();
        let c2 = &find_casimirs(&su2, 2, 4).unwrap()[0];
        assert_eq!(c2.evaluate(&l(&[0, 0, 1])), qi(1));
        assert_eq!(c2.evaluate(&l(&[0, 0, 0])), qi(0));
        assert_eq!(c2.evaluate(&[qr(1, 2), qr(1, 3), qr(1, 6)]), qr(7, 18));
    }

    #[test]
    fn infinitesimal_invariance_holds_at_sample_points() {
        for model in catalog::all_fixtures() {
            let cs = find_casimirs(&model, 3, 4).unwrap();
            for lam in sample_covectors(&model, DEFAULT_SEED) {
                for c in &cs {
                    assert!(infinitesimal_invariance_at(&model, c, &lam), "{}", model.name);
                }
            }
        }
    }

    #[test]
    fn hyperplane_casimirs_h3() {
        // On the stratum f3 = 0 everything Poisson-commutes, so f1 and f2
        // become (s=1)-type Casimirs.
        let cs = find_casimirs_on_hyperplane(&catalog::heisenberg3(), 1, 4, &[2]).unwrap();
        let printed: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        assert_eq!(printed, vec!["f1", "f2"]);
        for c in &cs {
            assert!(verify_casimir_on_hyperplane(&catalog::heisenberg3(), c, &[2]).is_empty());
        }
    }

    #[test]
    fn defects_of_fixtures() {
        let r = defect(&catalog::su2_sphere(), DEFAULT_SEED);
        assert_eq!((r.defect, r.sup_rank_full, r.sup_rank_h_block), (0, 2, 1));
        let r = defect(&catalog::heisenberg3_h2(), DEFAULT_SEED);
        assert_eq!((r.defect, r.sup_rank_full, r.sup_rank_h_block), (0, 2, 1));
        let ab =
            crate::liealg::LieAlgebraModel::from_entries_one_based("ab-h", 3, &[], &[1]).unwrap();
        assert_eq!(defect(&ab, DEFAULT_SEED).defect, 0);
        for model in catalog::all_fixtures() {
            assert!(defect(&model, DEFAULT_SEED).defect >= 0, "{}", model.name);
        }
    }

    #[test]
    fn kirillov_form_antisymmetric_blocks() {
        let h3 = catalog::heisenberg3();
        let w = kirillov_form(&h3, &l(&[0, 0, 1]), &[0, 1]);
        assert_eq!(w, vec![vec![qi(0), qi(1)], vec![qi(-1), qi(0)]]);
        assert_eq!(linalg::rank(&w), orbit_rank(&h3, &l(&[0, 0, 1])));

        let su2 = catalog::su2();
        let w = kirillov_form(&su2, &l(&[0, 0, 1]), &[0, 1]);
        assert_eq!(w, vec![vec![qi(0), qi(1)], vec![qi(-1), qi(0)]]);

        let w = kirillov_form(&h3, &l(&[2, 3, 5]), &[1]);
        assert_eq!(w, vec![vec![qi(0)]]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_covectors(&catalog::su2(), DEFAULT_SEED);
        let b = sample_covectors(&catalog::su2(), DEFAULT_SEED);
        assert_eq!(a, b);
        let c = sample_covectors(&catalog::su2(), DEFAULT_SEED + 1);
        assert_ne!(a, c);
    }
}

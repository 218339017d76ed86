//! Desk-scale fixture algebras, metrics and canonical transitions used
//! across tests, docs and the bundled example model files.

use crate::expr::parse;
use crate::lambdarep::CanonicalTransition;
use crate::liealg::LieAlgebraModel;
use crate::linalg::Mat;
use crate::ratio::{qi, Q};

/// Abelian algebra of the given dimension.
pub fn abelian(dim: usize) -> LieAlgebraModel {
    LieAlgebraModel::from_entries_one_based(&format!("abelian{dim}"), dim, &[], &[]).unwrap()
}

/// Heisenberg algebra `h3`: `[e1, e2] = e3`.
pub fn heisenberg3() -> LieAlgebraModel {
    LieAlgebraModel::from_entries_one_based("heisenberg3", 3, &[(3, 1, 2, qi(1))], &[]).unwrap()
}

/// `su(2)`: `[e_i, e_j] = eps_{ijk} e_k`.
pub fn su2() -> LieAlgebraModel {
    LieAlgebraModel::from_entries_one_based(
        "su2",
        3,
        &[(3, 1, 2, qi(1)), (1, 2, 3, qi(1)), (2, 1, 3, qi(-1))],
        &[],
    )
    .unwrap()
}

/// Two-dimensional solvable algebra: `[e1, e2] = e2`.
pub fn solvable2() -> LieAlgebraModel {
    LieAlgebraModel::from_entries_one_based("solvable2", 2, &[(2, 1, 2, qi(1))], &[]).unwrap()
}

/// Three-dimensional solvable algebra: `[e1, e3] = e1`, `[e2, e3] = e2`
/// (non-unimodular: `tr ad_{e3} = -2`).
pub fn solvable3() -> LieAlgebraModel {
    LieAlgebraModel::from_entries_one_based(
        "solvable3",
        3,
        &[(1, 1, 3, qi(1)), (2, 2, 3, qi(1))],
        &[],
    )
    .unwrap()
}

/// `su(2)` with stationary subalgebra `h = span(e3)` (the two-sphere).
pub fn su2_sphere() -> LieAlgebraModel {
    LieAlgebraModel::from_entries_one_based(
        "su2-sphere",
        3,
        &[(3, 1, 2, qi(1)), (1, 2, 3, qi(1)), (2, 1, 3, qi(-1))],
        &[3],
    )
    .unwrap()
}

/// `h3` with stationary subalgebra `h = span(e2)`.
pub fn heisenberg3_h2() -> LieAlgebraModel {
    LieAlgebraModel::from_entries_one_based("heisenberg3-h2", 3, &[(3, 1, 2, qi(1))], &[2]).unwrap()
}

/// Every fixture with a trivial stationary subalgebra.
pub fn all_fixtures() -> Vec<LieAlgebraModel> {
    vec![abelian(2), abelian(3), heisenberg3(), su2(), solvable2(), solvable3()]
}

/// The identity metric of the given size.
pub fn delta(n: usize) -> Mat<Q> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { qi(1) } else { qi(0) }).collect())
        .collect()
}

/// Diagonal metric from the given entries.
pub fn diag(entries: &[Q]) -> Mat<Q> {
    let n = entries.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { entries[i].clone() } else { Q::from_integer(0.into()) })
                .collect()
        })
        .collect()
}

/// Bracket-sign convention the catalog transitions are tabulated in; with
/// this sign the operator closure is `[l_X, l_Y] = +sum C^K_XY l_K`.
pub const CATALOG_BRACKET_SIGN: i32 = -1;

/// `h3` slice realization through `lambda0 = (0,0,1)`:
/// `f_1 = p1, f_2 = l3*q1, f_3 = l3` (use [`CATALOG_BRACKET_SIGN`]).
pub fn h3_transition() -> CanonicalTransition {
    CanonicalTransition {
        alpha: vec![
            vec![parse("1").unwrap()],
            vec![parse("0").unwrap()],
            vec![parse("0").unwrap()],
        ],
        chi: vec![parse("0").unwrap(), parse("l3*q1").unwrap(), parse("l3").unwrap()],
        lambda0: vec![qi(0), qi(0), qi(1)],
        n_pairs: 1,
    }
}

/// `su(2)` slice realization through `lambda0 = (0,0,1)` built from
/// `f_- = p`, `f_3 = -i q p + l3`, `f_+ = q^2 p + 2 i l3 q` in the real
/// basis (use [`CATALOG_BRACKET_SIGN`]).
pub fn su2_transition() -> CanonicalTransition {
    CanonicalTransition {
        alpha: vec![
            vec![parse("1/2*q1^2 + 1/2").unwrap()],
            vec![parse("-1/2*i*q1^2 + 1/2*i").unwrap()],
            vec![parse("-i*q1").unwrap()],
        ],
        chi: vec![parse("i*l3*q1").unwrap(), parse("l3*q1").unwrap(), parse("l3").unwrap()],
        lambda0: vec![qi(0), qi(0), qi(1)],
        n_pairs: 1,
    }
}

/// Abelian transition `f_X = l_X` (multiplication operators, no `q`).
pub fn abelian_transition(dim: usize) -> CanonicalTransition {
    CanonicalTransition {
        alpha: vec![vec![]; dim],
        chi: (1..=dim).map(|i| parse(&format!("l{i}")).unwrap()).collect(),
        lambda0: vec![qi(1); dim],
        n_pairs: 0,
    }
}

/// 2-dim solvable transition `f_1 = p1 + l1`, `f_2 = l2 exp(q1)` (use
/// [`CATALOG_BRACKET_SIGN`]).
pub fn solvable2_transition() -> CanonicalTransition {
    CanonicalTransition {
        alpha: vec![vec![parse("1").unwrap()], vec![parse("0").unwrap()]],
        chi: vec![parse("l1").unwrap(), parse("l2*exp(q1)").unwrap()],
        lambda0: vec![qi(1), qi(1)],
        n_pairs: 1,
    }
}

//! Matrix representations of the Clifford algebra for a symmetric bilinear
//! form, and the algebraic spinor connection.
//!
//! Generators come from the standard tensor-product construction over 2x2
//! blocks for the diagonalized form, then transform back by congruence.
//! Exactly-diagonal input forms skip the eigen solver.

use crate::geometry::ConnectionData;
use crate::linalg::Mat;
use crate::ratio::{q_to_f64, Q};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

/// Entrywise tolerance on the anticommutation invariants.
pub const ANTICOMMUTATION_TOL: f64 = 1e-12;
/// Largest supported spatial dimension (matrices up to 8x8).
pub const MAX_SPATIAL_DIM: usize = 5;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliffordError {
    #[error("form must be symmetric")]
    NotSymmetric,
    #[error("form is singular (|eigenvalue| < {0:e})")]
    Singular(f64),
    #[error("form dimension {0} exceeds the supported cap {1}")]
    TooLarge(usize, usize),
    #[error("anticommutation check failed after construction: max residual {0:e}")]
    AnticommutationCheckFailed(f64),
    #[error("spinor connection dimension mismatch: connection has {0} indices, representation has {1}")]
    DimensionMismatch(usize, usize),
}

fn pauli() -> [CMat; 3] {
    let i = Complex64::new(0.0, 1.0);
    let o = Complex64::ZERO;
    let one = Complex64::ONE;
    [
        CMat::from_row_slice(2, 2, &[o, one, one, o]),
        CMat::from_row_slice(2, 2, &[o, -i, i, o]),
        CMat::from_row_slice(2, 2, &[one, o, o, -one]),
    ]
}

fn ident(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Hermitian generators `A_1..A_k` with `{A_a, A_b} = 2 delta_ab`, built as
/// tensor products of Pauli blocks; representation size `2^floor(k/2)`.
fn euclidean_generators(k: usize) -> Vec<CMat> {
    let [s1, s2, s3] = pauli();
    let m = k / 2;
    let mut gens = Vec::with_capacity(k);
    for j in 1..=m {
        let mut a = ident(1);
        let mut b = ident(1);
        for _ in 0..j - 1 {
            a = a.kronecker(&s3);
            b = b.kronecker(&s3);
        }
        a = a.kronecker(&s1);
        b = b.kronecker(&s2);
        for _ in 0..m - j {
            a = a.kronecker(&ident(2));
            b = b.kronecker(&ident(2));
        }
        gens.push(a);
        gens.push(b);
    }
    if k % 2 == 1 {
        let mut a = ident(1);
        for _ in 0..m {
            a = a.kronecker(&s3);
        }
        gens.push(a);
    }
    gens
}

fn is_exactly_diagonal(form: &DMatrix<f64>) -> bool {
    let n = form.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || form[(i, j)] == 0.0))
}

fn max_anticommutation_residual(gens: &[CMat], form: &DMatrix<f64>) -> f64 {
    let n = gens.len();
    let dim = gens[0].nrows();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in a..n {
            let anti = &gens[a] * &gens[b] + &gens[b] * &gens[a];
            let target = 2.0 * form[(a, b)];
            for i in 0..dim {
                for j in 0..dim {
                    let expect = if i == j { Complex64::new(target, 0.0) } else { Complex64::ZERO };
                    worst = worst.max((anti[(i, j)] - expect).norm());
                }
            }
        }
    }
    worst
}

/// Build matrices `g_1..g_k` with `{g_a, g_b} = 2 F_ab E` for an arbitrary
/// symmetric nondegenerate form `F`, size `2^floor(k/2)`.
pub fn build_generators(form: &DMatrix<f64>) -> Result<Vec<CMat>, CliffordError> {
    let k = form.nrows();
    if k > MAX_SPATIAL_DIM + 1 {
        return Err(CliffordError::TooLarge(k, MAX_SPATIAL_DIM + 1));
    }
    let sym_tol = 1e-12;
    for i in 0..k {
        for j in 0..k {
            if (form[(i, j)] - form[(j, i)]).abs() > sym_tol {
                return Err(CliffordError::NotSymmetric);
            }
        }
    }
    // Congruence S^T F S = diag(sign) with S = V |D|^{-1/2}; transform the
    // signature generators back by T = V |D|^{1/2}: g_a = sum_b T_ab gamma_b.
    let (eigvecs, eigvals) = if is_exactly_diagonal(form) {
        (DMatrix::<f64>::identity(k, k), (0..k).map(|i| form[(i, i)]).collect::<Vec<_>>())
    } else {
        let eig = SymmetricEigen::new(form.clone());
        (eig.eigenvectors.clone(), eig.eigenvalues.iter().copied().collect())
    };
    let scale = eigvals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let singular_tol = 1e-10 * scale.max(1.0);
    if eigvals.iter().any(|v| v.abs() < singular_tol) {
        return Err(CliffordError::Singular(singular_tol));
    }
    let base = euclidean_generators(k);
    let i = Complex64::new(0.0, 1.0);
    let gammas_sig: Vec<CMat> = base
        .into_iter()
        .zip(eigvals.iter())
        .map(|(g, &d)| if d < 0.0 { g.map(|x| x * i) } else { g })
        .collect();
    let n = gammas_sig[0].nrows();
    let mut out = Vec::with_capacity(k);
    for a in 0..k {
        let mut g = CMat::zeros(n, n);
        for (b, gb) in gammas_sig.iter().enumerate() {
            let t = eigvecs[(a, b)] * eigvals[b].abs().sqrt();
            if t != 0.0 {
                g += gb.map(|x| x * Complex64::new(t, 0.0));
            }
        }
        out.push(g);
    }
    let residual = max_anticommutation_residual(&out, form);
    if residual > ANTICOMMUTATION_TOL {
        return Err(CliffordError::AnticommutationCheckFailed(residual));
    }
    Ok(out)
}

/// Clifford representation for a spatial form plus the unit time direction:
/// generators of `diag(1) ⊕ spatial_form`, size `2^floor((n+1)/2)`.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub spatial_dim: usize,
    /// The spatial bilinear form `gamma_ab` the spatial generators satisfy.
    pub form: DMatrix<f64>,
    pub gamma0: CMat,
    pub gammas: Vec<CMat>,
}

impl CliffordRep {
    /// Build the representation for `diag(1) ⊕ spatial_form`.
    pub fn for_spacetime(spatial_form: DMatrix<f64>) -> Result<Self, CliffordError> {
        let n = spatial_form.nrows();
        if n > MAX_SPATIAL_DIM {
            return Err(CliffordError::TooLarge(n, MAX_SPATIAL_DIM));
        }
        let mut full = DMatrix::<f64>::zeros(n + 1, n + 1);
        full[(0, 0)] = 1.0;
        for i in 0..n {
            for j in 0..n {
                full[(i + 1, j + 1)] = spatial_form[(i, j)];
            }
        }
        let gens = build_generators(&full)?;
        let mut it = gens.into_iter();
        let gamma0 = it.next().expect("at least the time generator");
        Ok(CliffordRep { spatial_dim: n, form: spatial_form, gamma0, gammas: it.collect() })
    }

    /// Representation size `2^floor((n+1)/2)`.
    pub fn rep_dim(&self) -> usize {
        self.gamma0.nrows()
    }

    /// Raised spatial matrices `gamma^a = (form^-1)^{ab} gamma_b`.
    pub fn gammas_raised(&self) -> Vec<CMat> {
        let inv = self
            .form
            .clone()
            .try_inverse()
            .expect("spatial form is nondegenerate by construction");
        let n = self.spatial_dim;
        (0..n)
            .map(|a| {
                let mut g = CMat::zeros(self.rep_dim(), self.rep_dim());
                for (b, gb) in self.gammas.iter().enumerate() {
                    let t = inv[(a, b)];
                    if t != 0.0 {
                        g += gb.map(|x| x * Complex64::new(t, 0.0));
                    }
                }
                g
            })
            .collect()
    }

    /// Max residual of all anticommutation identities including the time
    /// direction, entrywise.
    pub fn anticommutation_residual(&self) -> f64 {
        let n = self.spatial_dim + 1;
        let mut full = DMatrix::<f64>::zeros(n, n);
        full[(0, 0)] = 1.0;
        for i in 0..self.spatial_dim {
            for j in 0..self.spatial_dim {
                full[(i + 1, j + 1)] = self.form[(i, j)];
            }
        }
        let mut gens = vec![self.gamma0.clone()];
        gens.extend(self.gammas.iter().cloned());
        max_anticommutation_residual(&gens, &full)
    }
}

/// The spatial form fed to the Clifford constructor: `-B_m` by default
/// (Lorentzian signature with `G_00 = 1`, `G_ab = -gamma_ab`), `+B_m` when
/// `riemannian` is set.
pub fn spatial_form_from_metric(b_m: &Mat<Q>, riemannian: bool) -> DMatrix<f64> {
    let n = b_m.len();
    let sign = if riemannian { 1.0 } else { -1.0 };
    DMatrix::from_fn(n, n, |i, j| sign * q_to_f64(&b_m[i][j]))
}

/// Spinor connection `Gamma_a = -1/4 Gamma^c_{ba} gamma^b gamma_c` with the
/// exact index placement of the defining formula.
pub fn spinor_connection(
    connection: &ConnectionData,
    rep: &CliffordRep,
) -> Result<Vec<CMat>, CliffordError> {
    let n = connection.dim();
    if n != rep.spatial_dim {
        return Err(CliffordError::DimensionMismatch(n, rep.spatial_dim));
    }
    let raised = rep.gammas_raised();
    let dim = rep.rep_dim();
    let quarter = Complex64::new(-0.25, 0.0);
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let mut m = CMat::zeros(dim, dim);
        for b in 0..n {
            for c in 0..n {
                let coeff = q_to_f64(&connection.gamma[c][b][a]);
                if coeff != 0.0 {
                    m += (&raised[b] * &rep.gammas[c]).map(|x| x * quarter * coeff);
                }
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Max |trace| over the connection matrices (zero by the algebra's
/// trace identity `Gamma^b_{ba} = 0`).
pub fn max_connection_trace(conn: &[CMat]) -> f64 {
    conn.iter().map(|m| m.trace().norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::geometry;
    use crate::ratio::qi;

    fn diag_form(entries: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(entries.len(), entries.len(), |i, j| if i == j { entries[i] } else { 0.0 })
    }

    #[test]
    fn minkowski_generators_are_4x4_and_anticommute() {
        let form = diag_form(&[1.0, -1.0, -1.0, -1.0]);
        let gens = build_generators(&form).unwrap();
        assert_eq!(gens.len(), 4);
        assert_eq!(gens[0].nrows(), 4);
        assert!(max_anticommutation_residual(&gens, &form) <= ANTICOMMUTATION_TOL);
    }

    #[test]
    fn spatial_triple_is_2x2() {
        let form = diag_form(&[-1.0, -1.0, -1.0]);
        let gens = build_generators(&form).unwrap();
        assert_eq!(gens.len(), 3);
        assert_eq!(gens[0].nrows(), 2);
        assert!(max_anticommutation_residual(&gens, &form) <= ANTICOMMUTATION_TOL);
        // gamma_a = +-i * Pauli: squares are -1
        for g in &gens {
            let sq = g * g;
            assert!((sq[(0, 0)] + Complex64::ONE).norm() <= 1e-14);
        }
    }

    #[test]
    fn off_diagonal_form_via_congruence() {
        let form = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let gens = build_generators(&form).unwrap();
        assert_eq!(gens[0].nrows(), 2);
        assert!(max_anticommutation_residual(&gens, &form) <= ANTICOMMUTATION_TOL);
    }

    #[test]
    fn singular_and_asymmetric_forms_rejected() {
        let sing = diag_form(&[1.0, 0.0]);
        assert!(matches!(build_generators(&sing), Err(CliffordError::Singular(_))));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        assert_eq!(build_generators(&asym).unwrap_err(), CliffordError::NotSymmetric);
    }

    #[test]
    fn spacetime_rep_dimensions() {
        // n = 3 spatial: 2^((3+1)/2) = 4 including the time direction.
        let rep = CliffordRep::for_spacetime(diag_form(&[-1.0, -1.0, -1.0])).unwrap();
        assert_eq!(rep.rep_dim(), 4);
        assert!(rep.anticommutation_residual() <= ANTICOMMUTATION_TOL);
        // gamma0 squares to +1, anticommutes with the spatial set
        let sq = &rep.gamma0 * &rep.gamma0;
        assert!((sq[(1, 1)] - Complex64::ONE).norm() <= 1e-14);
        for g in &rep.gammas {
            let anti = &rep.gamma0 * g + g * &rep.gamma0;
            assert!(anti.iter().all(|z| z.norm() <= 1e-14));
        }
    }

    #[test]
    fn spatial_form_sign_convention() {
        let b = catalog::delta(3);
        let f = spatial_form_from_metric(&b, false);
        assert_eq!(f[(0, 0)], -1.0);
        let f = spatial_form_from_metric(&b, true);
        assert_eq!(f[(0, 0)], 1.0);
    }

    #[test]
    fn abelian_spinor_connection_vanishes() {
        let ab = catalog::abelian(3);
        let metric = geometry::build_form_b(&ab, &catalog::delta(3)).unwrap();
        let conn = geometry::christoffel(&ab, &metric);
        let rep = CliffordRep::for_spacetime(spatial_form_from_metric(&metric.b_m, false)).unwrap();
        let sc = spinor_connection(&conn, &rep).unwrap();
        assert!(sc.iter().all(|m| m.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn su2_and_h3_connection_traces_vanish() {
        for model in [catalog::su2(), catalog::heisenberg3()] {
            let metric = geometry::build_form_b(&model, &catalog::delta(3)).unwrap();
            let conn = geometry::christoffel(&model, &metric);
            let rep =
                CliffordRep::for_spacetime(spatial_form_from_metric(&metric.b_m, false)).unwrap();
            let sc = spinor_connection(&conn, &rep).unwrap();
            assert!(max_connection_trace(&sc) <= ANTICOMMUTATION_TOL, "{}", model.name);
            // nonzero connection for these curvatures
            assert!(sc.iter().any(|m| m.iter().any(|z| z.norm() > 1e-3)), "{}", model.name);
        }
    }

    #[test]
    fn connection_dimension_mismatch_detected() {
        let su2 = catalog::su2();
        let metric = geometry::build_form_b(&su2, &catalog::delta(3)).unwrap();
        let conn = geometry::christoffel(&su2, &metric);
        let rep = CliffordRep::for_spacetime(diag_form(&[-1.0, -1.0])).unwrap();
        assert_eq!(
            spinor_connection(&conn, &rep).unwrap_err(),
            CliffordError::DimensionMismatch(3, 2)
        );
    }

    #[test]
    fn squashed_metric_connection_traces_vanish() {
        let su2 = catalog::su2();
        let g = catalog::diag(&[qi(1), qi(1), qi(4)]);
        let metric = geometry::build_form_b(&su2, &g).unwrap();
        let conn = geometry::christoffel(&su2, &metric);
        let rep = CliffordRep::for_spacetime(spatial_form_from_metric(&metric.b_m, false)).unwrap();
        let sc = spinor_connection(&conn, &rep).unwrap();
        assert!(max_connection_trace(&sc) <= 1e-12);
    }
}

//! Vacuum stress-energy-momentum mode densities in quasi-tetrad components,
//! for scalar and spinor fields, integrated by plain quadrature sums over
//! the supplied measures (no regularization).
//!
//! Scalar formulas, with `psi-bar` the complex conjugate:
//!
//! ```text
//! T_00 = -1/2 int omega |psi|^2
//! T_0a = (i/2) int conj(psi) (l_a psi)
//! T_ab = int (1/(2 omega)) conj(psi) ({l_a, l_b}+ - zeta~ R_ab) psi
//! ```
//!
//! Spinor formulas follow the printed component groups verbatim; note that
//! the `T_0a` group mixes `psi^dag`-sesquilinear and Dirac-conjugate
//! (`psi-bar = psi^dag gamma_0`) terms across its three integrands, and the
//! `(ab)` symmetrizations carry weight 1/2.

use crate::clifford::{CliffordRep, CMat};
use crate::expr::{self, Expr};
use crate::fields::{
    pairwise_sum_complex, FieldsError, ModeFunction, QuadratureGrid,
};
use crate::lambdarep::{DiffOperator, LambdaOperator};
use crate::linalg::Mat;
use crate::ratio::{q_to_f64, Q};
use num_complex::Complex64;

/// Reality/symmetry tolerance on integrated components.
pub const REALITY_TOL: f64 = 1e-9;

/// Per-lambda-node (or per-mode) pre-integration densities: the value of
/// each component's `q`-quadrature before the outer measure weight.
#[derive(Clone, Debug)]
pub struct DensityRow {
    /// Index into the lambda measure (scalar) or the mode list (spinor).
    pub index: usize,
    pub t00: Complex64,
    pub t0a: Vec<Complex64>,
    pub tab: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct SemtDiagnostics {
    pub max_imag_t00: f64,
    pub max_imag_tab: f64,
    pub max_asymmetry_tab: f64,
    /// Growth pattern of |t00| across density rows.
    pub t00_monotonicity: String,
}

/// Integrated quasi-tetrad components with the pre-integration tables.
#[derive(Clone, Debug)]
pub struct SemtReport {
    pub t00: Complex64,
    pub t0a: Vec<Complex64>,
    pub tab: Vec<Vec<Complex64>>,
    pub densities: Vec<DensityRow>,
    pub diagnostics: SemtDiagnostics,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SemtError {
    #[error("omega = 0: the T_ab formula divides by the mode frequency")]
    ZeroOmega,
    #[error(transparent)]
    Fields(#[from] FieldsError),
    #[error("spinor length {0} does not match the representation dimension {1}")]
    SpinorLength(usize, usize),
    #[error("no modes supplied")]
    NoModes,
}

/// Symbolic anticommutator `{l_a, l_b}+ = l_a l_b + l_b l_a` as a
/// second-order operator table.
pub fn anticommutator_operator(a: &LambdaOperator, b: &LambdaOperator) -> DiffOperator {
    a.to_diff_operator().anticommutator(&b.to_diff_operator())
}

fn eval(e: &Expr, b: &expr::Binding) -> Complex64 {
    expr::evaluate(e, b).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

fn diagnostics(rows: &[DensityRow], t00: Complex64, tab: &[Vec<Complex64>]) -> SemtDiagnostics {
    let k = tab.len();
    let mut max_imag_tab = 0.0f64;
    let mut max_asym = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            max_imag_tab = max_imag_tab.max(tab[a][b].im.abs());
            max_asym = max_asym.max((tab[a][b] - tab[b][a]).norm());
        }
    }
    let mags: Vec<f64> = rows.iter().map(|r| r.t00.norm()).collect();
    let monotonicity = if mags.len() < 2 {
        "single-node".to_string()
    } else {
        let inc = mags.windows(2).all(|w| w[1] >= w[0]);
        let dec = mags.windows(2).all(|w| w[1] <= w[0]);
        match (inc, dec) {
            (true, true) => "constant".to_string(),
            (true, false) => "increasing".to_string(),
            (false, true) => "decreasing".to_string(),
            _ => "mixed".to_string(),
        }
    };
    SemtDiagnostics {
        max_imag_t00: t00.im.abs(),
        max_imag_tab,
        max_asymmetry_tab: max_asym,
        t00_monotonicity: monotonicity,
    }
}

/// Scalar vacuum mode densities. `ricci_m` is the Ricci matrix over the
/// `m`-indices and `zeta_tilde` the coupling entering the `T_ab` integrand.
/// The mode is expected to be unit-normalized.
pub fn semt_scalar(
    mode: &ModeFunction,
    ops_m: &[LambdaOperator],
    ricci_m: &Mat<Q>,
    zeta_tilde: f64,
    grid: &QuadratureGrid,
) -> Result<SemtReport, SemtError> {
    let psi = mode.scalar_expr()?;
    let omega = mode.omega;
    if omega == 0.0 {
        return Err(SemtError::ZeroOmega);
    }
    let k = ops_m.len();
    let n_pairs = ops_m.first().map(|o| o.coeffs.len()).unwrap_or(0);
    grid.validate(n_pairs)?;

    // symbolic images, once
    let lpsi: Vec<Expr> = ops_m.iter().map(|op| op.apply(psi)).collect();
    let mut anti_psi: Vec<Vec<Expr>> = vec![vec![Expr::zero(); k]; k];
    for a in 0..k {
        for b in a..k {
            let image = anticommutator_operator(&ops_m[a], &ops_m[b]).apply(psi);
            anti_psi[a][b] = image.clone();
            anti_psi[b][a] = image;
        }
    }
    let ricci: Vec<Vec<f64>> =
        ricci_m.iter().map(|row| row.iter().map(q_to_f64).collect()).collect();

    let half_i = Complex64::new(0.0, 0.5);
    let mut rows = Vec::with_capacity(grid.lambda_nodes.len());
    for (li, lambda) in grid.lambda_nodes.iter().enumerate() {
        let nq = grid.q_nodes.len();
        let mut d00 = Vec::with_capacity(nq);
        let mut d0a = vec![Vec::with_capacity(nq); k];
        let mut dab = vec![vec![Vec::with_capacity(nq); k]; k];
        for (node, w) in grid.q_nodes.iter().zip(grid.q_weights.iter()) {
            let bnd = grid_binding(grid, node, lambda);
            let p = eval(psi, &bnd);
            let pc = p.conj();
            d00.push(*w * p.norm_sqr());
            for a in 0..k {
                d0a[a].push(*w * pc * eval(&lpsi[a], &bnd));
                for b in a..k {
                    let integrand = pc * (eval(&anti_psi[a][b], &bnd) - zeta_tilde * ricci[a][b] * p);
                    dab[a][b].push(*w * integrand);
                }
            }
        }
        let t00 = Complex64::new(-0.5 * omega, 0.0)
            * pairwise_sum_complex(&d00.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        let t0a: Vec<Complex64> =
            (0..k).map(|a| half_i * pairwise_sum_complex(&d0a[a])).collect();
        let mut tab = vec![vec![Complex64::ZERO; k]; k];
        for a in 0..k {
            for b in a..k {
                let v = pairwise_sum_complex(&dab[a][b]) / (2.0 * omega);
                tab[a][b] = v;
                tab[b][a] = v;
            }
        }
        rows.push(DensityRow { index: li, t00, t0a, tab });
    }

    let (t00, t0a, tab) = integrate_rows(&rows, &grid.lambda_weights, k);
    let diagnostics = diagnostics(&rows, t00, &tab);
    Ok(SemtReport { t00, t0a, tab, densities: rows, diagnostics })
}

fn grid_binding(_grid: &QuadratureGrid, node: &[f64], lambda: &[f64]) -> expr::Binding {
    let mut b = expr::Binding::new();
    for (a, &x) in node.iter().enumerate() {
        b.set_real(expr::Var::q(a as u8 + 1), x);
    }
    for (i, &l) in lambda.iter().enumerate() {
        b.set_real(expr::Var::l(i as u8 + 1), l);
    }
    b
}

fn integrate_rows(
    rows: &[DensityRow],
    weights: &[f64],
    k: usize,
) -> (Complex64, Vec<Complex64>, Vec<Vec<Complex64>>) {
    let weighted =
        |f: &dyn Fn(&DensityRow) -> Complex64| -> Complex64 {
            let vals: Vec<Complex64> = rows
                .iter()
                .map(|r| f(r) * weights.get(r.index).copied().unwrap_or(1.0))
                .collect();
            pairwise_sum_complex(&vals)
        };
    let t00 = weighted(&|r| r.t00);
    let t0a: Vec<Complex64> = (0..k).map(|a| weighted(&|r| r.t0a[a])).collect();
    let tab: Vec<Vec<Complex64>> = (0..k)
        .map(|a| (0..k).map(|b| weighted(&|r| r.tab[a][b])).collect())
        .collect();
    (t00, t0a, tab)
}

/// Spinor vacuum mode densities, one density row per supplied mode. Each
/// mode is weighted by the matching `big_lambda_weights` entry (default 1);
/// the s-label measure is the enumeration itself. Modes are expected to be
/// unit-normalized.
pub fn semt_spinor(
    modes: &[ModeFunction],
    ops_m: &[LambdaOperator],
    rep: &CliffordRep,
    spin_conn: &[CMat],
    grid: &QuadratureGrid,
) -> Result<SemtReport, SemtError> {
    if modes.is_empty() {
        return Err(SemtError::NoModes);
    }
    let k = ops_m.len();
    let nrep = rep.rep_dim();
    let n_pairs = ops_m.first().map(|o| o.coeffs.len()).unwrap_or(0);
    grid.validate(n_pairs)?;
    let i = Complex64::new(0.0, 1.0);

    let mut rows = Vec::with_capacity(modes.len());
    for (mi, mode) in modes.iter().enumerate() {
        let spinor = mode.spinor_exprs()?;
        if spinor.len() != nrep {
            return Err(SemtError::SpinorLength(spinor.len(), nrep));
        }
        let lam = mode.big_lambda;
        let lpsi: Vec<Vec<Expr>> =
            ops_m.iter().map(|op| spinor.iter().map(|c| op.apply(c)).collect()).collect();

        let nq = grid.q_nodes.len();
        let mut d00 = Vec::with_capacity(nq);
        let mut d0a = vec![Vec::with_capacity(nq); k];
        let mut dab = vec![vec![Vec::with_capacity(nq); k]; k];
        for (node, w) in grid.q_nodes.iter().zip(grid.q_weights.iter()) {
            let bnd = grid_binding(grid, node, &mode.lambda_values);
            let psi_v: Vec<Complex64> = spinor.iter().map(|c| eval(c, &bnd)).collect();
            let lpsi_v: Vec<Vec<Complex64>> = lpsi
                .iter()
                .map(|comps| comps.iter().map(|c| eval(c, &bnd)).collect())
                .collect();
            let gpsi: Vec<Vec<Complex64>> =
                (0..k).map(|a| mat_vec(&spin_conn[a], &psi_v)).collect();
            // psi-bar = psi^dag gamma_0 as a row vector
            let bar: Vec<Complex64> = (0..nrep)
                .map(|c| {
                    let mut s = Complex64::ZERO;
                    for r in 0..nrep {
                        s += psi_v[r].conj() * rep.gamma0[(r, c)];
                    }
                    s
                })
                .collect();

            // T_00 density: -Lambda psi^dag psi
            let pdp: f64 = psi_v.iter().map(|z| z.norm_sqr()).sum();
            d00.push(Complex64::new(-lam * pdp * w, 0.0));

            for a in 0..k {
                // -1/2 Lambda psi-bar gamma_a psi
                let g_a_psi = mat_vec(&rep.gammas[a], &psi_v);
                let term1 = -0.5 * lam * dot(&bar, &g_a_psi);
                // (i/2) psi^dag (l_a psi)
                let term2 = 0.5 * i * dot_dag(&psi_v, &lpsi_v[a]);
                // (i/4) (psi^dag Gamma_a psi - conj(Gamma_a psi) gamma_0 psi)
                let g0psi = mat_vec(&rep.gamma0, &psi_v);
                let term3 = 0.25 * i * (dot_dag(&psi_v, &gpsi[a]) - dot_dag(&gpsi[a], &g0psi));
                d0a[a].push(*w * (term1 + term2 + term3));
            }
            for a in 0..k {
                for b in a..k {
                    // i psi-bar gamma_(a l_b) psi with weight-1/2 symmetrization
                    let sym1 = 0.5
                        * (dot(&bar, &mat_vec(&rep.gammas[a], &lpsi_v[b]))
                            + dot(&bar, &mat_vec(&rep.gammas[b], &lpsi_v[a])));
                    // (i/2)[ psi-bar gamma_(a Gamma_b) psi - conj(Gamma_(a psi) gamma_0 gamma_b) psi ]
                    let sym2 = 0.5
                        * (dot(&bar, &mat_vec(&rep.gammas[a], &gpsi[b]))
                            + dot(&bar, &mat_vec(&rep.gammas[b], &gpsi[a])));
                    let sym3 = 0.5
                        * (bar_of(&gpsi[a], rep, &mat_vec(&rep.gammas[b], &psi_v))
                            + bar_of(&gpsi[b], rep, &mat_vec(&rep.gammas[a], &psi_v)));
                    let integrand = i * sym1 + 0.5 * i * (sym2 - sym3);
                    dab[a][b].push(*w * integrand);
                }
            }
        }
        let t00 = pairwise_sum_complex(&d00);
        let t0a: Vec<Complex64> = (0..k).map(|a| pairwise_sum_complex(&d0a[a])).collect();
        let mut tab = vec![vec![Complex64::ZERO; k]; k];
        for a in 0..k {
            for b in a..k {
                let v = pairwise_sum_complex(&dab[a][b]);
                tab[a][b] = v;
                tab[b][a] = v;
            }
        }
        rows.push(DensityRow { index: mi, t00, t0a, tab });
    }

    let (t00, t0a, tab) = integrate_rows(&rows, &grid.big_lambda_weights, k);
    let diagnostics = diagnostics(&rows, t00, &tab);
    Ok(SemtReport { t00, t0a, tab, densities: rows, diagnostics })
}

/// `conj(v)^T w`.
fn dot_dag(v: &[Complex64], w: &[Complex64]) -> Complex64 {
    v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `v^T w` for a prepared row vector `v`.
fn dot(v: &[Complex64], w: &[Complex64]) -> Complex64 {
    v.iter().zip(w.iter()).map(|(a, b)| a * b).sum()
}

/// `(x)-bar y = conj(x)^T gamma_0 y` (Dirac conjugation of `x`).
fn bar_of(x: &[Complex64], rep: &CliffordRep, y: &[Complex64]) -> Complex64 {
    let g0y = mat_vec(&rep.gamma0, y);
    dot_dag(x, &g0y)
}

fn mat_vec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    let n = m.nrows();
    (0..n)
        .map(|r| {
            let mut s = Complex64::ZERO;
            for (c, x) in v.iter().enumerate() {
                s += m[(r, c)] * x;
            }
            s
        })
        .collect()
}

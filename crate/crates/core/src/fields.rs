//! Mode-level field equations on the K-orbit: the Klein-Gordon dispersion,
//! Laplace residual through lambda-operators, Dirac operator residual,
//! homogeneity constraint, and mode normalization by quadrature.

use crate::clifford::{CliffordRep, CMat};
use crate::expr::{self, Binding, Expr, Var};
use crate::lambdarep::{DiffOperator, LambdaOperator};
use crate::linalg::Mat;
use crate::ratio::{q_from_f64, q_to_f64, Q};
use num_complex::Complex64;
use num_traits::Zero;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FieldsError {
    #[error("tachyonic mode: omega^2 = {0} is negative")]
    TachyonicMode(f64),
    #[error("zero norm: the mode vanishes on the whole grid")]
    ZeroNorm,
    #[error("zero spinor: every component vanishes on the grid")]
    ZeroSpinor,
    #[error("quadrature weights must be positive")]
    NonPositiveWeight,
    #[error("grid node dimension {0} does not match the expected {1}")]
    NodeDimension(usize, usize),
    #[error("spinor length {0} does not match the representation dimension {1}")]
    SpinorLength(usize, usize),
    #[error("mode has no spinor components but a spinor operation was requested")]
    NotSpinor,
    #[error("mode is a spinor but a scalar operation was requested")]
    NotScalar,
}

/// Deterministic pairwise summation; the fixed reduction tree keeps reports
/// bit-stable regardless of how node evaluation is scheduled.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::ZERO,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum_complex(a) + pairwise_sum_complex(b)
        }
    }
}

/// Quadrature data: `q`-nodes with weights encoding `dmu(q)`, a lambda
/// measure, and an optional Lambda measure for spinor mode families.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub q_nodes: Vec<Vec<f64>>,
    pub q_weights: Vec<f64>,
    /// Full-dimension lambda vectors with weights; defaults to a single atom.
    pub lambda_nodes: Vec<Vec<f64>>,
    pub lambda_weights: Vec<f64>,
    pub big_lambda_weights: Vec<f64>,
}

impl QuadratureGrid {
    /// A zero-dimensional `q` grid (one empty node of weight one) with a
    /// single lambda atom.
    pub fn point(lambda: Vec<f64>) -> Self {
        QuadratureGrid {
            q_nodes: vec![vec![]],
            q_weights: vec![1.0],
            lambda_nodes: vec![lambda],
            lambda_weights: vec![1.0],
            big_lambda_weights: vec![1.0],
        }
    }

    /// Tensor-product composite Simpson grid over a box; every dimension
    /// needs an odd node count >= 3.
    pub fn simpson_box(bounds: &[(f64, f64)], nodes_per_dim: &[usize], lambda: Vec<f64>) -> Result<Self, FieldsError> {
        assert_eq!(bounds.len(), nodes_per_dim.len());
        let mut axes: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for (&(lo, hi), &n) in bounds.iter().zip(nodes_per_dim.iter()) {
            assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd node count >= 3");
            assert!(hi > lo, "empty box");
            let h = (hi - lo) / (n - 1) as f64;
            let nodes: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
            let weights: Vec<f64> = (0..n)
                .map(|i| {
                    let w = if i == 0 || i == n - 1 {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * h / 3.0
                })
                .collect();
            axes.push((nodes, weights));
        }
        let mut q_nodes = vec![vec![]];
        let mut q_weights = vec![1.0];
        for (nodes, weights) in axes {
            let mut next_nodes = Vec::with_capacity(q_nodes.len() * nodes.len());
            let mut next_weights = Vec::with_capacity(q_weights.len() * weights.len());
            for (base, bw) in q_nodes.iter().zip(q_weights.iter()) {
                for (x, w) in nodes.iter().zip(weights.iter()) {
                    let mut node = base.clone();
                    node.push(*x);
                    next_nodes.push(node);
                    next_weights.push(bw * w);
                }
            }
            q_nodes = next_nodes;
            q_weights = next_weights;
        }
        Ok(QuadratureGrid {
            q_nodes,
            q_weights,
            lambda_nodes: vec![lambda],
            lambda_weights: vec![1.0],
            big_lambda_weights: vec![1.0],
        })
    }

    pub fn with_lambda_measure(mut self, nodes: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), weights.len());
        self.lambda_nodes = nodes;
        self.lambda_weights = weights;
        self
    }

    pub fn validate(&self, n_q_vars: usize) -> Result<(), FieldsError> {
        if self.q_weights.iter().chain(self.lambda_weights.iter()).any(|&w| w <= 0.0) {
            return Err(FieldsError::NonPositiveWeight);
        }
        for node in &self.q_nodes {
            if node.len() != n_q_vars {
                return Err(FieldsError::NodeDimension(node.len(), n_q_vars));
            }
        }
        Ok(())
    }

    pub fn n_q_vars(&self) -> usize {
        self.q_nodes.first().map(|n| n.len()).unwrap_or(0)
    }

    fn binding(&self, node: &[f64], lambda: &[f64]) -> Binding {
        let mut b = Binding::new();
        for (a, &x) in node.iter().enumerate() {
            b.set_real(Var::q(a as u8 + 1), x);
        }
        for (i, &l) in lambda.iter().enumerate() {
            b.set_real(Var::l(i as u8 + 1), l);
        }
        b
    }
}

/// Scalar or spinor mode data.
#[derive(Clone, Debug)]
pub enum ModePsi {
    Scalar(Expr),
    Spinor(Vec<Expr>),
}

impl ModePsi {
    pub fn components(&self) -> Vec<&Expr> {
        match self {
            ModePsi::Scalar(e) => vec![e],
            ModePsi::Spinor(es) => es.iter().collect(),
        }
    }
}

/// A mode with its separation constant, bound lambda components and the
/// frequency from the dispersion relation (`omega^2 = Lambda^2 + zeta R + m^2`
/// for scalars, `omega = |Lambda|` for spinors).
#[derive(Clone, Debug)]
pub struct ModeFunction {
    pub psi: ModePsi,
    pub big_lambda: f64,
    pub lambda_values: Vec<f64>,
    pub omega: f64,
}

impl ModeFunction {
    pub fn scalar(
        psi: Expr,
        big_lambda: f64,
        lambda_values: Vec<f64>,
        scalar_curvature: f64,
        mass: f64,
        spatial_dim: u32,
    ) -> Result<Self, FieldsError> {
        let (_, omega) = kg_dispersion(big_lambda, scalar_curvature, mass, spatial_dim)?;
        Ok(ModeFunction { psi: ModePsi::Scalar(psi), big_lambda, lambda_values, omega })
    }

    pub fn spinor(components: Vec<Expr>, big_lambda: f64, lambda_values: Vec<f64>) -> Self {
        ModeFunction {
            psi: ModePsi::Spinor(components),
            big_lambda,
            lambda_values,
            omega: big_lambda.abs(),
        }
    }

    pub fn scalar_expr(&self) -> Result<&Expr, FieldsError> {
        match &self.psi {
            ModePsi::Scalar(e) => Ok(e),
            ModePsi::Spinor(_) => Err(FieldsError::NotScalar),
        }
    }

    pub fn spinor_exprs(&self) -> Result<&[Expr], FieldsError> {
        match &self.psi {
            ModePsi::Spinor(es) => Ok(es),
            ModePsi::Scalar(_) => Err(FieldsError::NotSpinor),
        }
    }
}

/// Conformal coupling and frequency: `zeta = (n-1)/(4n)`,
/// `omega = sqrt(Lambda^2 + zeta R + m^2)`.
pub fn kg_dispersion(
    big_lambda: f64,
    scalar_curvature: f64,
    mass: f64,
    n: u32,
) -> Result<(f64, f64), FieldsError> {
    assert!(n >= 1, "spatial dimension must be positive");
    let zeta = (n as f64 - 1.0) / (4.0 * n as f64);
    let radicand = big_lambda * big_lambda + zeta * scalar_curvature + mass * mass;
    if radicand < 0.0 {
        return Err(FieldsError::TachyonicMode(radicand));
    }
    Ok((zeta, radicand.sqrt()))
}

fn eval_on(e: &Expr, b: &Binding) -> Complex64 {
    expr::evaluate(e, b).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// `H = B^{ab} (l_a l_b - tr(ad_a) l_b)` composed symbolically over the
/// `m`-indices; the residual is `max_grid |(-H - Lambda^2) psi|` with lambda
/// bound from the mode.
pub fn laplace_residual(
    mode: &ModeFunction,
    ops_m: &[LambdaOperator],
    b_m_inv: &Mat<Q>,
    ad_traces_m: &[Q],
    grid: &QuadratureGrid,
) -> Result<f64, FieldsError> {
    let psi = mode.scalar_expr()?;
    let k = ops_m.len();
    let n_pairs = ops_m.first().map(|o| o.coeffs.len()).unwrap_or(0);
    grid.validate(n_pairs)?;
    let dops: Vec<DiffOperator> = ops_m.iter().map(|o| o.to_diff_operator()).collect();
    let mut h = DiffOperator::zero(n_pairs);
    for a in 0..k {
        for b in 0..k {
            let w = &b_m_inv[a][b];
            if w.is_zero() {
                continue;
            }
            let mut term = dops[a].compose(&dops[b]);
            if !ad_traces_m[a].is_zero() {
                term = term.sub(&dops[b].scale(&Expr::rat(ad_traces_m[a].clone())));
            }
            h = h.add(&term.scale(&Expr::rat(w.clone())));
        }
    }
    let image = h.apply(psi);
    let lam2 = mode.big_lambda * mode.big_lambda;
    let mut worst: f64 = 0.0;
    for node in &grid.q_nodes {
        let b = grid.binding(node, &mode.lambda_values);
        let r = (-eval_on(&image, &b) - lam2 * eval_on(psi, &b)).norm();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Residual of `[gamma^a (l_a + Gamma_a) - i Lambda gamma^0 + i m] psi`,
/// max vector norm over the grid.
pub fn dirac_residual(
    mode: &ModeFunction,
    ops_m: &[LambdaOperator],
    rep: &CliffordRep,
    spin_conn: &[CMat],
    mass: f64,
    grid: &QuadratureGrid,
) -> Result<f64, FieldsError> {
    let spinor = mode.spinor_exprs()?;
    let nrep = rep.rep_dim();
    if spinor.len() != nrep {
        return Err(FieldsError::SpinorLength(spinor.len(), nrep));
    }
    let n_pairs = ops_m.first().map(|o| o.coeffs.len()).unwrap_or(0);
    grid.validate(n_pairs)?;
    let raised = rep.gammas_raised();
    let i = Complex64::new(0.0, 1.0);
    // symbolic l_a psi_j upfront
    let lpsi: Vec<Vec<Expr>> =
        ops_m.iter().map(|op| spinor.iter().map(|c| op.apply(c)).collect()).collect();

    let mut worst: f64 = 0.0;
    let mut any_nonzero = false;
    for node in &grid.q_nodes {
        let b = grid.binding(node, &mode.lambda_values);
        let psi_v: Vec<Complex64> = spinor.iter().map(|c| eval_on(c, &b)).collect();
        if psi_v.iter().any(|z| z.norm() > 0.0) {
            any_nonzero = true;
        }
        let mut out = vec![Complex64::ZERO; nrep];
        for (a, ga) in raised.iter().enumerate() {
            // (l_a + Gamma_a) psi at the node
            let mut vec_a: Vec<Complex64> =
                lpsi[a].iter().map(|c| eval_on(c, &b)).collect();
            for r in 0..nrep {
                for c in 0..nrep {
                    vec_a[r] += spin_conn[a][(r, c)] * psi_v[c];
                }
            }
            for r in 0..nrep {
                for c in 0..nrep {
                    out[r] += ga[(r, c)] * vec_a[c];
                }
            }
        }
        for r in 0..nrep {
            let mut g0psi = Complex64::ZERO;
            for c in 0..nrep {
                g0psi += rep.gamma0[(r, c)] * psi_v[c];
            }
            out[r] += -i * mode.big_lambda * g0psi + i * mass * psi_v[r];
        }
        let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(norm);
    }
    if !any_nonzero {
        return Err(FieldsError::ZeroSpinor);
    }
    Ok(worst)
}

/// `max |l_alpha psi|` over the grid for the stationary-subalgebra indices.
pub fn homogeneity_check(
    mode: &ModeFunction,
    ops: &[LambdaOperator],
    h_indices: &[usize],
    grid: &QuadratureGrid,
) -> Result<f64, FieldsError> {
    let components = mode.psi.components();
    let n_pairs = ops.first().map(|o| o.coeffs.len()).unwrap_or(0);
    grid.validate(n_pairs)?;
    let mut worst: f64 = 0.0;
    for &alpha in h_indices {
        for comp in &components {
            let image = ops[alpha].apply(comp);
            for node in &grid.q_nodes {
                let b = grid.binding(node, &mode.lambda_values);
                worst = worst.max(eval_on(&image, &b).norm());
            }
        }
    }
    Ok(worst)
}

/// Quadrature norm `sqrt(int |psi|^2 dmu(q))` at the mode's lambda values;
/// the returned mode is rescaled to unit norm (exact dyadic scale factor).
pub fn normalize_mode(
    mode: &ModeFunction,
    grid: &QuadratureGrid,
) -> Result<(f64, ModeFunction), FieldsError> {
    let components = mode.psi.components();
    let n_q = grid.n_q_vars();
    grid.validate(n_q)?;
    let mut terms = Vec::with_capacity(grid.q_nodes.len());
    for (node, w) in grid.q_nodes.iter().zip(grid.q_weights.iter()) {
        let b = grid.binding(node, &mode.lambda_values);
        let density: f64 = components.iter().map(|c| eval_on(c, &b).norm_sqr()).sum();
        terms.push(w * density);
    }
    let norm_sq = pairwise_sum(&terms);
    if !norm_sq.is_finite() || norm_sq <= 0.0 {
        return Err(FieldsError::ZeroNorm);
    }
    let norm = norm_sq.sqrt();
    let scale = Expr::rat(q_from_f64(1.0 / norm).expect("finite scale"));
    let rescale = |e: &Expr| expr::canonicalize(Expr::Prod(vec![scale.clone(), e.clone()]));
    let psi = match &mode.psi {
        ModePsi::Scalar(e) => ModePsi::Scalar(rescale(e)),
        ModePsi::Spinor(es) => ModePsi::Spinor(es.iter().map(rescale).collect()),
    };
    Ok((
        norm,
        ModeFunction {
            psi,
            big_lambda: mode.big_lambda,
            lambda_values: mode.lambda_values.clone(),
            omega: mode.omega,
        },
    ))
}

/// Helper shared with the CLI: the `m`-restricted operator set plus the
/// matching inverse metric and adjoint traces.
pub fn restrict_to_m(
    ops: &[LambdaOperator],
    ad_traces: &[Q],
    m_indices: &[usize],
) -> (Vec<LambdaOperator>, Vec<Q>) {
    let ops_m = m_indices.iter().map(|&i| ops[i].clone()).collect();
    let traces_m = m_indices.iter().map(|&i| ad_traces[i].clone()).collect();
    (ops_m, traces_m)
}

pub fn q_mat_to_f64(m: &Mat<Q>) -> Vec<Vec<f64>> {
    m.iter().map(|row| row.iter().map(q_to_f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::clifford::{spatial_form_from_metric, CliffordRep};
    use crate::expr::parse;
    use crate::geometry;
    use crate::lambdarep::{
        build_operators, validate_canonical_transition, CheckOptions,
    };
    use crate::liealg;
    use crate::ratio::qi;

    fn abelian_ops(dim: usize) -> Vec<LambdaOperator> {
        let t = catalog::abelian_transition(dim);
        let model = catalog::abelian(dim);
        let (_, v) =
            validate_canonical_transition(&model, &t, &[], &CheckOptions::default()).unwrap();
        build_operators(&v.unwrap())
    }

    fn h3_ops() -> Vec<LambdaOperator> {
        let model = catalog::heisenberg3();
        let t = catalog::h3_transition();
        let opts = CheckOptions {
            bracket_sign: catalog::CATALOG_BRACKET_SIGN,
            ..Default::default()
        };
        let (_, v) = validate_canonical_transition(&model, &t, &[], &opts).unwrap();
        build_operators(&v.unwrap())
    }

    #[test]
    fn dispersion_values() {
        let (zeta, _) = kg_dispersion(0.0, 0.0, 1.0, 3).unwrap();
        assert_eq!(zeta, 1.0 / 6.0);
        let (_, omega) = kg_dispersion(0.0, 0.0, 2.0, 3).unwrap();
        assert_eq!(omega, 2.0);
        let (_, omega) = kg_dispersion(3.0, 6.0, 0.0, 3).unwrap();
        assert!((omega - 10.0f64.sqrt()).abs() <= 1e-12);
        assert_eq!(
            kg_dispersion(0.0, -60.0, 0.0, 3).unwrap_err(),
            FieldsError::TachyonicMode(-10.0)
        );
    }

    #[test]
    fn dispersion_monotonicity() {
        let mut prev = 0.0;
        for k in 0..20 {
            let lam = 0.25 * k as f64;
            let (_, w) = kg_dispersion(lam, 1.0, 0.5, 3).unwrap();
            assert!(w >= prev);
            prev = w;
        }
        let (_, w0) = kg_dispersion(0.0, 0.0, 1.5, 4).unwrap();
        assert_eq!(w0, 1.5);
    }

    #[test]
    fn simpson_gaussian_norm_oracle() {
        // int exp(-2 q^2) dq = sqrt(pi/2); 129-node Simpson on [-6, 6].
        let grid = QuadratureGrid::simpson_box(&[(-6.0, 6.0)], &[129], vec![0.0]).unwrap();
        let psi = parse("exp(-q1^2)").unwrap();
        let mode = ModeFunction::scalar(psi, 1.0, vec![0.0], 0.0, 0.0, 3).unwrap();
        let (norm, unit) = normalize_mode(&mode, &grid).unwrap();
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!(((norm * norm - exact) / exact).abs() <= 1e-8, "norm^2 = {}", norm * norm);
        // idempotent after the first application
        let (n2, _) = normalize_mode(&unit, &grid).unwrap();
        assert!((n2 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn unit_norm_trivial_cases() {
        let grid = QuadratureGrid::simpson_box(&[(0.0, 1.0)], &[129], vec![0.0]).unwrap();
        let mode = ModeFunction::scalar(parse("1").unwrap(), 0.0, vec![0.0], 0.0, 1.0, 3).unwrap();
        let (norm, _) = normalize_mode(&mode, &grid).unwrap();
        assert!((norm - 1.0).abs() <= 1e-12);
        let mode =
            ModeFunction::scalar(parse("exp(i*5*q1)").unwrap(), 0.0, vec![0.0], 0.0, 1.0, 3)
                .unwrap();
        let (norm, _) = normalize_mode(&mode, &grid).unwrap();
        assert!((norm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_norm_rejected() {
        let grid = QuadratureGrid::point(vec![0.0]);
        let mode = ModeFunction::scalar(parse("0").unwrap(), 0.0, vec![0.0], 0.0, 1.0, 3).unwrap();
        assert_eq!(normalize_mode(&mode, &grid).unwrap_err(), FieldsError::ZeroNorm);
    }

    #[test]
    fn laplace_residual_abelian_plane_wave() {
        // l_A = i lambda_A, psi = 1, B = delta: -H psi = |lambda|^2 psi.
        let model = catalog::abelian(3);
        let ops = abelian_ops(3);
        let metric = geometry::build_form_b(&model, &catalog::delta(3)).unwrap();
        let traces = liealg::ad_trace_vector(&model);
        let lambda = vec![1.0, 2.0, 2.0];
        let lam2 = 9.0f64;
        let grid = QuadratureGrid::point(lambda.clone());
        let mode = ModeFunction::scalar(parse("1").unwrap(), lam2.sqrt(), lambda, 0.0, 0.0, 3)
            .unwrap();
        let r = laplace_residual(&mode, &ops, &metric.b_m_inv, &traces, &grid).unwrap();
        assert!(r <= 1e-12, "residual {r}");

        // mismatched Lambda shows up linearly
        let mode2 = ModeFunction {
            big_lambda: (lam2 + 1.0).sqrt(),
            ..mode
        };
        let r2 = laplace_residual(&mode2, &ops, &metric.b_m_inv, &traces, &grid).unwrap();
        assert!((r2 - 1.0).abs() <= 1e-9, "expected |Lambda^2 - Lambda_true^2| = 1, got {r2}");
    }

    #[test]
    fn laplace_residual_h3_zero_center_stratum() {
        // lambda_3 = 0: l_2 = l_3 = 0 and H = d^2; psi = exp(i k q) solves
        // with Lambda = k.
        let model = catalog::heisenberg3();
        let ops = h3_ops();
        let metric = geometry::build_form_b(&model, &catalog::delta(3)).unwrap();
        let traces = liealg::ad_trace_vector(&model);
        let grid = QuadratureGrid::simpson_box(&[(-1.0, 1.0)], &[41], vec![0.0, 0.0, 0.0]).unwrap();
        let mode = ModeFunction::scalar(
            parse("exp(i*3*q1)").unwrap(),
            3.0,
            vec![0.0, 0.0, 0.0],
            0.0,
            0.0,
            3,
        )
        .unwrap();
        let r = laplace_residual(&mode, &ops, &metric.b_m_inv, &traces, &grid).unwrap();
        assert!(r <= 1e-9, "residual {r}");
    }

    #[test]
    fn laplace_residual_h3_gaussian_ground_mode() {
        // With lambda_3 = 2: -H = -d^2 + 4 q^2 + 4, psi = exp(-q^2) gives
        // Lambda^2 = lambda_3 + lambda_3^2 = 6.
        let model = catalog::heisenberg3();
        let ops = h3_ops();
        let metric = geometry::build_form_b(&model, &catalog::delta(3)).unwrap();
        let traces = liealg::ad_trace_vector(&model);
        let lambda = vec![0.0, 0.0, 2.0];
        let grid = QuadratureGrid::simpson_box(&[(-3.0, 3.0)], &[61], lambda.clone()).unwrap();
        let mode =
            ModeFunction::scalar(parse("exp(-q1^2)").unwrap(), 6.0f64.sqrt(), lambda, 0.0, 0.0, 3)
                .unwrap();
        let r = laplace_residual(&mode, &ops, &metric.b_m_inv, &traces, &grid).unwrap();
        assert!(r <= 1e-9, "residual {r}");
    }

    #[test]
    fn laplace_residual_scales_homogeneously() {
        let model = catalog::heisenberg3();
        let ops = h3_ops();
        let metric = geometry::build_form_b(&model, &catalog::delta(3)).unwrap();
        let traces = liealg::ad_trace_vector(&model);
        let lambda = vec![0.0, 0.0, 2.0];
        let grid = QuadratureGrid::simpson_box(&[(-2.0, 2.0)], &[21], lambda.clone()).unwrap();
        let psi = parse("exp(-q1^2) + q1^2").unwrap();
        let mode =
            ModeFunction::scalar(psi.clone(), 1.3, lambda.clone(), 0.0, 0.0, 3).unwrap();
        let r1 = laplace_residual(&mode, &ops, &metric.b_m_inv, &traces, &grid).unwrap();
        let scaled = ModeFunction::scalar(
            psi.scale(qi(2)),
            1.3,
            lambda,
            0.0,
            0.0,
            3,
        )
        .unwrap();
        let r2 = laplace_residual(&scaled, &ops, &metric.b_m_inv, &traces, &grid).unwrap();
        assert!((r2 - 2.0 * r1).abs() <= 1e-9 * (1.0 + r1), "{r1} vs {r2}");
    }

    #[test]
    fn dirac_kernel_mode_from_eigen_oracle() {
        // Abelian: D = i(sum_a lambda_a gamma^a - Lambda gamma^0 + m) is a
        // constant matrix; build a kernel vector from the projector column
        // of (M + Lambda I) with M = gamma^0 (sum lambda_a gamma^a + m).
        let model = catalog::abelian(3);
        let ops = abelian_ops(3);
        let metric = geometry::build_form_b(&model, &catalog::delta(3)).unwrap();
        let rep = CliffordRep::for_spacetime(spatial_form_from_metric(&metric.b_m, false)).unwrap();
        let nrep = rep.rep_dim();
        let spin_conn = vec![CMat::zeros(nrep, nrep); 3];
        let lambda = [0.3, -0.2, 0.5];
        let mass = 0.7;
        let raised = rep.gammas_raised();
        let mut m_mat = CMat::zeros(nrep, nrep);
        for (a, g) in raised.iter().enumerate() {
            m_mat += g.map(|x| x * Complex64::new(lambda[a], 0.0));
        }
        m_mat += CMat::identity(nrep, nrep).map(|x| x * Complex64::new(mass, 0.0));
        m_mat = &rep.gamma0 * m_mat;
        let big_lambda = (mass * mass + lambda.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let proj = &m_mat + CMat::identity(nrep, nrep).map(|x| x * Complex64::new(big_lambda, 0.0));
        // densest column of the projector is a kernel vector of (M - Lambda)
        let col = (0..nrep)
            .max_by(|&a, &b| {
                let na: f64 = (0..nrep).map(|r| proj[(r, a)].norm_sqr()).sum();
                let nb: f64 = (0..nrep).map(|r| proj[(r, b)].norm_sqr()).sum();
                na.partial_cmp(&nb).unwrap()
            })
            .unwrap();
        let spinor: Vec<Expr> =
            (0..nrep).map(|r| Expr::complex_const(proj[(r, col)])).collect();
        let mode = ModeFunction::spinor(spinor, big_lambda, lambda.to_vec());
        let grid = QuadratureGrid::point(lambda.to_vec());
        let r = dirac_residual(&mode, &ops, &rep, &spin_conn, mass, &grid).unwrap();
        assert!(r <= 1e-10, "kernel mode residual {r}");

        // generic Lambda leaves a visible residual
        let off = ModeFunction {
            big_lambda: big_lambda + 0.5,
            ..mode
        };
        let r = dirac_residual(&off, &ops, &rep, &spin_conn, mass, &grid).unwrap();
        assert!(r > 1e-3);
    }

    #[test]
    fn dirac_degenerate_everything_zero() {
        let ops = abelian_ops(3);
        let model = catalog::abelian(3);
        let metric = geometry::build_form_b(&model, &catalog::delta(3)).unwrap();
        let rep = CliffordRep::for_spacetime(spatial_form_from_metric(&metric.b_m, false)).unwrap();
        let nrep = rep.rep_dim();
        let spin_conn = vec![CMat::zeros(nrep, nrep); 3];
        let lambda = vec![0.0, 0.0, 0.0];
        let mut comps = vec![parse("1").unwrap()];
        comps.extend((1..nrep).map(|_| parse("0").unwrap()));
        let mode = ModeFunction::spinor(comps, 0.0, lambda.clone());
        let grid = QuadratureGrid::point(lambda);
        let r = dirac_residual(&mode, &ops, &rep, &spin_conn, 0.0, &grid).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn zero_spinor_rejected() {
        let ops = abelian_ops(3);
        let model = catalog::abelian(3);
        let metric = geometry::build_form_b(&model, &catalog::delta(3)).unwrap();
        let rep = CliffordRep::for_spacetime(spatial_form_from_metric(&metric.b_m, false)).unwrap();
        let nrep = rep.rep_dim();
        let spin_conn = vec![CMat::zeros(nrep, nrep); 3];
        let mode = ModeFunction::spinor(vec![parse("0").unwrap(); nrep], 0.0, vec![0.0; 3]);
        let grid = QuadratureGrid::point(vec![0.0; 3]);
        assert_eq!(
            dirac_residual(&mode, &ops, &rep, &spin_conn, 0.0, &grid).unwrap_err(),
            FieldsError::ZeroSpinor
        );
    }

    #[test]
    fn homogeneity_abelian_and_h3() {
        // abelian with h = span(e2): residual 0 iff lambda_2 = 0.
        let ops = abelian_ops(3);
        let grid = QuadratureGrid::point(vec![1.0, 0.0, 2.0]);
        let mode = ModeFunction::scalar(
            parse("1").unwrap(),
            1.0,
            vec![1.0, 0.0, 2.0],
            0.0,
            0.0,
            3,
        )
        .unwrap();
        let r = homogeneity_check(&mode, &ops, &[1], &grid).unwrap();
        assert_eq!(r, 0.0);
        let mode_bad = ModeFunction::scalar(
            parse("1").unwrap(),
            1.0,
            vec![1.0, 1.0, 2.0],
            0.0,
            0.0,
            3,
        )
        .unwrap();
        let grid_bad = QuadratureGrid::point(vec![1.0, 1.0, 2.0]);
        let r = homogeneity_check(&mode_bad, &ops, &[1], &grid_bad).unwrap();
        assert!((r - 1.0).abs() <= 1e-12, "|l_2 psi| = |lambda_2| = 1, got {r}");

        // h3 with h = span(e3) on the lambda_3 = 0 stratum: any psi passes.
        let ops = h3_ops();
        let grid = QuadratureGrid::simpson_box(&[(-1.0, 1.0)], &[21], vec![0.5, 0.0, 0.0]).unwrap();
        let mode = ModeFunction::scalar(
            parse("exp(-q1^2) + q1").unwrap(),
            1.0,
            vec![0.5, 0.0, 0.0],
            0.0,
            0.0,
            3,
        )
        .unwrap();
        let r = homogeneity_check(&mode, &ops, &[2], &grid).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn grid_validation() {
        let grid = QuadratureGrid::point(vec![0.0]);
        assert!(grid.validate(0).is_ok());
        assert!(matches!(grid.validate(1), Err(FieldsError::NodeDimension(0, 1))));
        let mut bad = QuadratureGrid::point(vec![0.0]);
        bad.q_weights[0] = -1.0;
        assert_eq!(bad.validate(0).unwrap_err(), FieldsError::NonPositiveWeight);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() <= 1e-9);
    }
}

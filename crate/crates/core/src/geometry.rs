//! Algebraic invariant geometry of `P = G/H`: metric invariance check, the
//! induced form `B` on the complement `m`, Christoffel symbols, Riemann and
//! Ricci tensors and the scalar curvature — all exact rational arrays indexed
//! by the `m`-basis.
//!
//! Contraction conventions (fixed, echoed in reports): `Ricci_{ab} = R^c_{acb}`
//! and `Scalar = B^{ab} Ricci_{ab}`. On every catalog fixture the resulting
//! Ricci is exactly minus the Levi-Civita (Koszul) Ricci of the same frame
//! data, so reports carry both the signed value and `|Scalar|`.

use crate::liealg::LieAlgebraModel;
use crate::linalg::{self, Mat};
use crate::ratio::Q;
use num_traits::Zero;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeometryError {
    #[error("metric must be a symmetric {0}x{0} matrix")]
    NotSymmetric(usize),
    #[error("degenerate induced metric: restriction of G to m is singular")]
    DegenerateInducedMetric,
    #[error("metric invariance fails for {0} basis triples (X in h, Y, Z in L)")]
    NotInvariant(usize),
}

/// Quadratic form `G` on `L` together with its restriction `B` to `m`.
#[derive(Clone, Debug)]
pub struct InvariantMetric {
    pub g_full: Mat<Q>,
    pub b_m: Mat<Q>,
    pub b_m_inv: Mat<Q>,
}

/// Triple `(x, y, z)` (0-based) violating `G([X,Y],Z) + G(Y,[X,Z]) = 0`.
pub type InvarianceWitness = (usize, usize, usize);

/// Check `G([X,Y],Z) + G(Y,[X,Z]) = 0` for every `X` in the `h`-basis and all
/// `Y, Z` in the full basis. Exact; returns all violating triples.
pub fn check_metric_invariance(
    model: &LieAlgebraModel,
    g_full: &Mat<Q>,
) -> Result<(), Vec<InvarianceWitness>> {
    let n = model.dim;
    let mut witnesses = Vec::new();
    for &x in model.subalgebra_h() {
        for y in 0..n {
            for z in 0..n {
                let mut s = Q::zero();
                for e in 0..n {
                    s += model.c(e, x, y) * &g_full[e][z];
                    s += model.c(e, x, z) * &g_full[y][e];
                }
                if !s.is_zero() {
                    witnesses.push((x, y, z));
                }
            }
        }
    }
    if witnesses.is_empty() {
        Ok(())
    } else {
        Err(witnesses)
    }
}

/// Restrict `G` to `m` and require the restriction to be nondegenerate.
pub fn build_form_b(model: &LieAlgebraModel, g_full: &Mat<Q>) -> Result<InvariantMetric, GeometryError> {
    let n = model.dim;
    if g_full.len() != n || !linalg::is_symmetric(g_full) {
        return Err(GeometryError::NotSymmetric(n));
    }
    let m = model.complement_m();
    let b_m: Mat<Q> = m
        .iter()
        .map(|&i| m.iter().map(|&j| g_full[i][j].clone()).collect())
        .collect();
    let b_m_inv = linalg::invert(&b_m).ok_or(GeometryError::DegenerateInducedMetric)?;
    Ok(InvariantMetric { g_full: g_full.clone(), b_m, b_m_inv })
}

/// Christoffel symbols `Gamma^a_{bc}` over `m`-indices (positions into
/// `complement_m`, not full basis indices).
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    pub gamma: Vec<Mat<Q>>, // gamma[a][b][c]
}

impl ConnectionData {
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }
}

/// `Gamma^a_{bc} = -1/2 C^a_{bc} - 1/2 B^{ad} [B_{ec} C^e_{bd} + B_{eb} C^e_{cd}]`
/// with every index ranging over `m`.
pub fn christoffel(model: &LieAlgebraModel, metric: &InvariantMetric) -> ConnectionData {
    let m = model.complement_m();
    let k = m.len();
    let b = &metric.b_m;
    let binv = &metric.b_m_inv;
    let c = |a: usize, bb: usize, cc: usize| model.c(m[a], m[bb], m[cc]);
    let half = crate::ratio::qr(1, 2);
    let mut gamma = vec![linalg::zeros::<Q>(k, k); k];
    for a in 0..k {
        for bb in 0..k {
            for cc in 0..k {
                let mut s = -(&half * c(a, bb, cc));
                for d in 0..k {
                    for e in 0..k {
                        let inner = &b[e][cc] * c(e, bb, d) + &b[e][bb] * c(e, cc, d);
                        s -= &half * &binv[a][d] * inner;
                    }
                }
                gamma[a][bb][cc] = s;
            }
        }
    }
    ConnectionData { gamma }
}

/// Curvature arrays: `R^a_{bcd}`, its Ricci contraction and the scalar.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub riemann: Vec<Vec<Mat<Q>>>, // riemann[a][b][c][d]
    pub ricci: Mat<Q>,
    pub scalar: Q,
}

/// `R^a_{bcd} = Gamma^a_{ed} Gamma^e_{bc} - Gamma^a_{ec} Gamma^e_{bd}
///            + C^e_{cd} Gamma^a_{be}` with the dummy index over `m` only.
pub fn riemann(
    model: &LieAlgebraModel,
    connection: &ConnectionData,
    metric: &InvariantMetric,
) -> CurvatureData {
    let m = model.complement_m();
    let k = m.len();
    let g = &connection.gamma;
    let c = |a: usize, bb: usize, cc: usize| model.c(m[a], m[bb], m[cc]);
    let mut riem = vec![vec![linalg::zeros::<Q>(k, k); k]; k];
    for a in 0..k {
        for bb in 0..k {
            for cc in 0..k {
                for d in 0..k {
                    let mut s = Q::zero();
                    for e in 0..k {
                        s += &g[a][e][d] * &g[e][bb][cc];
                        s -= &g[a][e][cc] * &g[e][bb][d];
                        s += c(e, cc, d) * &g[a][bb][e];
                    }
                    riem[a][bb][cc][d] = s;
                }
            }
        }
    }
    let (ricci, scalar) = contract(&riem, metric);
    CurvatureData { riemann: riem, ricci, scalar }
}

/// The `(Ricci, Scalar)` pair under the declared contraction convention,
/// recomputed from stored curvature data.
pub fn ricci_scalar(curvature: &CurvatureData, metric: &InvariantMetric) -> (Mat<Q>, Q) {
    contract(&curvature.riemann, metric)
}

fn contract(riem: &[Vec<Mat<Q>>], metric: &InvariantMetric) -> (Mat<Q>, Q) {
    let k = riem.len();
    let mut ricci = linalg::zeros::<Q>(k, k);
    for a in 0..k {
        for b in 0..k {
            let mut s = Q::zero();
            for c in 0..k {
                s += &riem[c][a][c][b];
            }
            ricci[a][b] = s;
        }
    }
    let mut scalar = Q::zero();
    for a in 0..k {
        for b in 0..k {
            scalar += &metric.b_m_inv[a][b] * &ricci[a][b];
        }
    }
    (ricci, scalar)
}

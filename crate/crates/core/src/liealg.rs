//! Exact-arithmetic Lie algebra core: structure constants, Jacobi validation,
//! adjoint maps, Killing form, subalgebra checks and unimodularity data.
//!
//! Indices are 0-based throughout the API; file formats and human-readable
//! reports render them 1-based (see [`Violation`]'s `Display`).

use crate::linalg::{self, Mat};
use crate::ratio::Q;
use crate::MAX_DIM;
use num_traits::Zero;
use std::fmt;

/// A sparse structure-constant entry `C^a_{bc} = value` with `b < c`
/// (the antisymmetric partner is implied). Indices 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct CEntry {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub value: Q,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("dimension {0} out of range 1..={MAX_DIM}")]
    DimOutOfRange(usize),
    #[error("structure constant index out of range in entry (a={a}, b={b}, c={c}) for dim {dim} (1-based)")]
    IndexOutOfRange { a: usize, b: usize, c: usize, dim: usize },
    #[error("structure constant entry (a={a}, b={b}, c={c}) violates the canonical order b < c (1-based)")]
    NonCanonicalEntry { a: usize, b: usize, c: usize },
    #[error("duplicate structure constant entry (a={a}, b={b}, c={c}) (1-based)")]
    DuplicateEntry { a: usize, b: usize, c: usize },
    #[error("subalgebra index {0} out of range for dim {1} (1-based)")]
    SubalgebraIndex(usize, usize),
    #[error("subalgebra indices contain a duplicate: {0} (1-based)")]
    SubalgebraDuplicate(usize),
    #[error("expected {dim} basis labels, found {found}")]
    LabelCount { dim: usize, found: usize },
}

/// A finite-dimensional real Lie algebra `L` with a distinguished stationary
/// subalgebra `h` and complement `m` (`L = h ⊕ m`). Structure constants are
/// stored densely as exact rationals; the sparse canonical entries are kept
/// for echoing into reports.
#[derive(Clone, Debug)]
pub struct LieAlgebraModel {
    pub name: String,
    pub dim: usize,
    pub basis_labels: Vec<String>,
    entries: Vec<CEntry>,
    dense: Vec<Q>,
    subalgebra_h: Vec<usize>,
    complement_m: Vec<usize>,
}

impl LieAlgebraModel {
    /// Build a model from 1-based sparse entries `(a, b, c, value)` meaning
    /// `[e_b, e_c] = value·e_a + …` with `b < c`, plus 1-based subalgebra
    /// indices. This mirrors the file format and the usual table notation.
    pub fn from_entries_one_based(
        name: &str,
        dim: usize,
        entries: &[(usize, usize, usize, Q)],
        subalgebra_one_based: &[usize],
    ) -> Result<Self, ModelError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(ModelError::DimOutOfRange(dim));
        }
        let mut dense = vec![Q::zero(); dim * dim * dim];
        let mut sparse = Vec::with_capacity(entries.len());
        for &(a, b, c, ref v) in entries {
            if a == 0 || b == 0 || c == 0 || a > dim || b > dim || c > dim {
                return Err(ModelError::IndexOutOfRange { a, b, c, dim });
            }
            if b >= c {
                return Err(ModelError::NonCanonicalEntry { a, b, c });
            }
            let (a0, b0, c0) = (a - 1, b - 1, c - 1);
            let idx = Self::idx_of(dim, a0, b0, c0);
            if !dense[idx].is_zero() {
                return Err(ModelError::DuplicateEntry { a, b, c });
            }
            dense[idx] = v.clone();
            dense[Self::idx_of(dim, a0, c0, b0)] = -v.clone();
            sparse.push(CEntry { a: a0, b: b0, c: c0, value: v.clone() });
        }
        let mut subalgebra_h = Vec::with_capacity(subalgebra_one_based.len());
        for &i in subalgebra_one_based {
            if i == 0 || i > dim {
                return Err(ModelError::SubalgebraIndex(i, dim));
            }
            if subalgebra_h.contains(&(i - 1)) {
                return Err(ModelError::SubalgebraDuplicate(i));
            }
            subalgebra_h.push(i - 1);
        }
        subalgebra_h.sort_unstable();
        let complement_m = (0..dim).filter(|i| !subalgebra_h.contains(i)).collect();
        let basis_labels = (1..=dim).map(|i| format!("e{i}")).collect();
        Ok(LieAlgebraModel {
            name: name.to_string(),
            dim,
            basis_labels,
            entries: sparse,
            dense,
            subalgebra_h,
            complement_m,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() != self.dim {
            return Err(ModelError::LabelCount { dim: self.dim, found: labels.len() });
        }
        self.basis_labels = labels;
        Ok(self)
    }

    fn idx_of(dim: usize, a: usize, b: usize, c: usize) -> usize {
        (a * dim + b) * dim + c
    }

    /// Structure constant `C^a_{bc}` (0-based).
    pub fn c(&self, a: usize, b: usize, c: usize) -> &Q {
        &self.dense[Self::idx_of(self.dim, a, b, c)]
    }

    /// The canonical sparse entries (`b < c`), 0-based.
    pub fn entries(&self) -> &[CEntry] {
        &self.entries
    }

    /// 0-based indices spanning the stationary subalgebra `h`.
    pub fn subalgebra_h(&self) -> &[usize] {
        &self.subalgebra_h
    }

    /// 0-based indices spanning the complement `m`.
    pub fn complement_m(&self) -> &[usize] {
        &self.complement_m
    }

    /// Bracket `[x, y]` of coefficient vectors, exact.
    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim];
        for (a, o) in out.iter_mut().enumerate() {
            for b in 0..self.dim {
                if x[b].is_zero() {
                    continue;
                }
                for c in 0..self.dim {
                    if y[c].is_zero() {
                        continue;
                    }
                    *o += self.c(a, b, c) * &x[b] * &y[c];
                }
            }
        }
        out
    }
}

/// A single violated identity, with 0-based indices; `Display` renders them
/// 1-based as in the file format.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Antisymmetry { a: usize, b: usize, c: usize },
    Jacobi { a: usize, b: usize, c: usize, d: usize, residual: Q },
    SubalgebraClosure { a: usize, b: usize, c: usize, value: Q },
}

impl Violation {
    /// The indices of the violated identity, 1-based.
    pub fn indices_one_based(&self) -> Vec<usize> {
        match self {
            Violation::Antisymmetry { a, b, c } => vec![a + 1, b + 1, c + 1],
            Violation::Jacobi { a, b, c, d, .. } => vec![a + 1, b + 1, c + 1, d + 1],
            Violation::SubalgebraClosure { a, b, c, .. } => vec![a + 1, b + 1, c + 1],
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { a, b, c } => write!(
                f,
                "antisymmetry violated: C^{}_{{{},{}}} != -C^{}_{{{},{}}}",
                a + 1, b + 1, c + 1, a + 1, c + 1, b + 1
            ),
            Violation::Jacobi { a, b, c, d, residual } => write!(
                f,
                "Jacobi violated at (A,B,C)=({},{},{}), component D={}: residual {}",
                a + 1, b + 1, c + 1, d + 1, residual
            ),
            Violation::SubalgebraClosure { a, b, c, value } => write!(
                f,
                "subalgebra not closed: C^{}_{{{},{}}} = {} with e{} outside h",
                a + 1, b + 1, c + 1, value, a + 1
            ),
        }
    }
}

/// Result of [`validate_algebra`]; empty `violations` means valid.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check antisymmetry, the Jacobi identity and closure of the declared
/// subalgebra, all exactly. Every violated identity is listed with indices.
pub fn validate_algebra(model: &LieAlgebraModel) -> ValidationReport {
    let n = model.dim;
    let mut violations = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let lhs = model.c(a, b, c).clone();
                let rhs = -model.c(a, c, b).clone();
                if lhs != rhs {
                    violations.push(Violation::Antisymmetry { a, b, c });
                }
            }
        }
    }
    // Jacobi: sum_E C^E_AB C^D_EC + C^E_BC C^D_EA + C^E_CA C^D_EB = 0.
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                for d in 0..n {
                    let mut s = Q::zero();
                    for e in 0..n {
                        s += model.c(e, a, b) * model.c(d, e, c);
                        s += model.c(e, b, c) * model.c(d, e, a);
                        s += model.c(e, c, a) * model.c(d, e, b);
                    }
                    if !s.is_zero() {
                        violations.push(Violation::Jacobi { a, b, c, d, residual: s });
                    }
                }
            }
        }
    }
    let h = model.subalgebra_h();
    for &b in h {
        for &c in h.iter().filter(|&&c| c > b) {
            for a in 0..n {
                if h.contains(&a) {
                    continue;
                }
                let v = model.c(a, b, c);
                if !v.is_zero() {
                    violations.push(Violation::SubalgebraClosure {
                        a,
                        b,
                        c,
                        value: v.clone(),
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Adjoint matrix `ad_{e_X}` with `M^A_B = C^A_{X B}` (0-based `x`).
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointMatrix {
    pub x_index: usize,
    pub m: Mat<Q>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("basis index {0} out of range for dim {1} (0-based)")]
pub struct IndexOutOfRange(pub usize, pub usize);

pub fn adjoint_matrix(model: &LieAlgebraModel, x: usize) -> Result<AdjointMatrix, IndexOutOfRange> {
    if x >= model.dim {
        return Err(IndexOutOfRange(x, model.dim));
    }
    let m = (0..model.dim)
        .map(|a| (0..model.dim).map(|b| model.c(a, x, b).clone()).collect())
        .collect();
    Ok(AdjointMatrix { x_index: x, m })
}

/// Killing form `K_{AB} = tr(ad_A ad_B)`, symmetric by construction.
pub fn killing_form(model: &LieAlgebraModel) -> Mat<Q> {
    let n = model.dim;
    let ads: Vec<Mat<Q>> = (0..n).map(|x| adjoint_matrix(model, x).unwrap().m).collect();
    let mut k = linalg::zeros::<Q>(n, n);
    for a in 0..n {
        for b in a..n {
            let t = linalg::trace(&linalg::mat_mul(&ads[a], &ads[b]));
            k[a][b] = t.clone();
            k[b][a] = t;
        }
    }
    k
}

/// Entry `A` is `tr(ad_{e_A})`; the algebra is unimodular iff all vanish.
pub fn ad_trace_vector(model: &LieAlgebraModel) -> Vec<Q> {
    (0..model.dim)
        .map(|x| {
            let mut t = Q::zero();
            for a in 0..model.dim {
                t += model.c(a, x, a);
            }
            t
        })
        .collect()
}

/// Witness for a failed subalgebra check: `[e_b, e_c]` has a component along
/// `e_a` outside the span. 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureWitness {
    pub b: usize,
    pub c: usize,
    pub a: usize,
    pub value: Q,
}

/// True iff the span of `indices` (0-based) is closed under the bracket;
/// on failure returns the offending triple.
pub fn check_subalgebra(model: &LieAlgebraModel, indices: &[usize]) -> Result<(), ClosureWitness> {
    for &b in indices {
        for &c in indices {
            for a in 0..model.dim {
                if indices.contains(&a) {
                    continue;
                }
                let v = model.c(a, b, c);
                if !v.is_zero() {
                    return Err(ClosureWitness { b, c, a, value: v.clone() });
                }
            }
        }
    }
    Ok(())
}

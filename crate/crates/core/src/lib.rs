//! Workbench for finite-dimensional real Lie algebras given by structure
//! constants: invariant geometry on the associated homogeneous space,
//! coadjoint-orbit invariants (index, strata, Casimirs, defect), validated
//! lambda-representation operators, Clifford/spinor machinery, and numerically
//! evaluated vacuum stress-energy-momentum mode densities for scalar and
//! spinor fields.
//!
//! Everything algebraic is exact (`BigRational`); floating point enters only
//! through quadrature, Clifford congruence transforms and residual checks.

// Tensor contractions are written with explicit index loops so the code
// matches the index placement of the defining formulas.
#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod clifford;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod lambdarep;
pub mod liealg;
pub mod linalg;
pub mod model;
pub mod orbits;
pub mod ratio;
pub mod report;
pub mod semt;

pub use liealg::LieAlgebraModel;
pub use ratio::{Q, QC};

/// Largest supported basis dimension. The expression language addresses
/// variables `q1..q9`, `p1..p9`, `l1..l9`, which caps everything downstream.
pub const MAX_DIM: usize = 9;

//! Exact linear algebra over a field: rank, RREF, inverse, nullspace and
//! linear solves. Used with rationals and Gaussian rationals; everything is
//! tolerance-free.

use crate::ratio::{Q, QC};
use num_traits::{One, Zero};

/// Minimal field interface for the exact elimination routines.
pub trait Field: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Field for Q {
    fn zero() -> Self {
        <Q as Zero>::zero()
    }
    fn one() -> Self {
        <Q as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
}

impl Field for QC {
    fn zero() -> Self {
        QC::zero()
    }
    fn one() -> Self {
        QC::one()
    }
    fn is_zero(&self) -> bool {
        QC::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self.clone() + rhs.clone()
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.clone() - rhs.clone()
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }
    fn div(&self, rhs: &Self) -> Self {
        self.clone() / rhs.clone()
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
}

pub type Mat<T> = Vec<Vec<T>>;

pub fn zeros<T: Field>(rows: usize, cols: usize) -> Mat<T> {
    vec![vec![T::zero(); cols]; rows]
}

pub fn identity<T: Field>(n: usize) -> Mat<T> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

/// Reduced row echelon form; returns the reduced matrix and pivot columns.
pub fn rref<T: Field>(mat: &Mat<T>) -> (Mat<T>, Vec<usize>) {
    let mut m = mat.clone();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = T::one().div(&m[r][c]);
        for x in m[r].iter_mut() {
            *x = x.mul(&inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = f.mul(&m[r][j]);
                    m[i][j] = m[i][j].sub(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank<T: Field>(mat: &Mat<T>) -> usize {
    rref(mat).1.len()
}

/// Inverse of a square matrix, or `None` when singular.
pub fn invert<T: Field>(mat: &Mat<T>) -> Option<Mat<T>> {
    let n = mat.len();
    let mut aug: Mat<T> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "invert: matrix not square");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    let (red, pivots) = rref(&aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    aug = red;
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Canonical nullspace basis read off the RREF: one vector per free column,
/// with a unit entry at the free column. Deterministic.
pub fn nullspace<T: Field>(mat: &Mat<T>) -> Vec<Vec<T>> {
    let cols = if mat.is_empty() { 0 } else { mat[0].len() };
    let (red, pivots) = rref(mat);
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![T::zero(); cols];
        v[free] = T::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = red[r][free].neg();
        }
        basis.push(v);
    }
    basis
}

/// Row-space basis in RREF form (nonzero rows of the RREF).
pub fn row_basis<T: Field>(rows: &Mat<T>) -> (Mat<T>, Vec<usize>) {
    let (red, pivots) = rref(rows);
    (red.into_iter().take(pivots.len()).collect(), pivots)
}

/// Coordinates of `v` in an RREF row basis, or `None` when `v` is outside
/// the span. With unit pivots the candidate coordinates are just the pivot
/// components of `v`; membership is then an exact reconstruction check.
pub fn coords_in_row_basis<T: Field>(basis: &Mat<T>, pivots: &[usize], v: &[T]) -> Option<Vec<T>> {
    let coords: Vec<T> = pivots.iter().map(|&p| v[p].clone()).collect();
    let mut recon = vec![T::zero(); v.len()];
    for (c, row) in coords.iter().zip(basis.iter()) {
        for (r, x) in recon.iter_mut().zip(row.iter()) {
            let t = c.mul(x);
            *r = r.add(&t);
        }
    }
    if recon.iter().zip(v.iter()).all(|(a, b)| a == b) {
        Some(coords)
    } else {
        None
    }
}

pub fn mat_mul<T: Field>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut s = T::zero();
            for (l, b_row) in b.iter().enumerate().take(k) {
                let t = a[i][l].mul(&b_row[j]);
                s = s.add(&t);
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn mat_vec<T: Field>(a: &Mat<T>, v: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            let mut s = T::zero();
            for (x, y) in row.iter().zip(v.iter()) {
                let t = x.mul(y);
                s = s.add(&t);
            }
            s
        })
        .collect()
}

pub fn trace<T: Field>(a: &Mat<T>) -> T {
    let mut s = T::zero();
    for (i, row) in a.iter().enumerate() {
        s = s.add(&row[i]);
    }
    s
}

pub fn transpose<T: Field>(a: &Mat<T>) -> Mat<T> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut out = zeros(cols, rows);
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            out[j][i] = x.clone();
        }
    }
    out
}

pub fn is_symmetric<T: Field>(a: &Mat<T>) -> bool {
    let n = a.len();
    a.iter().all(|r| r.len() == n)
        && (0..n).all(|i| (0..i).all(|j| a[i][j] == a[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{qi, qr};

    fn m(rows: &[&[i64]]) -> Mat<Q> {
        rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()
    }

    #[test]
    fn rank_of_skew_matrix_is_even() {
        let a = m(&[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]]);
        assert_eq!(rank(&a), 2);
    }

    #[test]
    fn invert_round_trips() {
        let a = m(&[&[1, 2], &[3, 5]]);
        let inv = invert(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity::<Q>(2));
        let sing = m(&[&[1, 2], &[2, 4]]);
        assert!(invert(&sing).is_none());
    }

    #[test]
    fn nullspace_solves() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&a);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&a, v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn row_basis_membership() {
        let rows = m(&[&[1, 0, 1], &[0, 1, 1]]);
        let (basis, piv) = row_basis(&rows);
        let inside = vec![qi(2), qi(3), qi(5)];
        let coords = coords_in_row_basis(&basis, &piv, &inside).unwrap();
        assert_eq!(coords, vec![qi(2), qi(3)]);
        let outside = vec![qi(1), qi(0), qi(0)];
        assert!(coords_in_row_basis(&basis, &piv, &outside).is_none());
    }

    #[test]
    fn rref_with_fractions() {
        let a = vec![vec![qr(1, 2), qi(1)], vec![qi(1), qi(2)]];
        let (_, piv) = rref(&a);
        assert_eq!(piv.len(), 1);
    }
}

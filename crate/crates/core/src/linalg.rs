//! Small dense matrix helpers that have to work over both scalar types.
//!
//! Matrices here are `Vec<Vec<S>>` in row-major order; the heavier numerical
//! factorizations (Cholesky, SVD, eigenvalues) live in the consuming modules
//! and use `nalgebra` over `Complex64`.

use crate::scalar::{Scalar, C64};
use crate::{Error, Result};
use nalgebra::DMatrix;

pub type Mat<S> = Vec<Vec<S>>;

pub fn zeros<S: Scalar>(n: usize, m: usize) -> Mat<S> {
    vec![vec![S::zero(); m]; n]
}

pub fn identity<S: Scalar>(n: usize) -> Mat<S> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

/// Max asymmetry |m[a][b] − conj(m[b][a])| over all entries.
pub fn hermitian_defect<S: Scalar>(m: &Mat<S>) -> f64 {
    let n = m.len();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let d = m[a][b].clone() - m[b][a].conj();
            worst = worst.max(d.abs_f64());
        }
    }
    worst
}

/// Gauss-Jordan inverse with partial pivoting.  Pivots are picked by
/// approximate modulus; exact scalars fall back to any nonzero entry when the
/// approximation underflows.
pub fn invert<S: Scalar>(m: &Mat<S>) -> Result<Mat<S>> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity::<S>(n);
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col][col].abs_f64();
        for (row, r) in a.iter().enumerate().skip(col + 1) {
            let v = r[col].abs_f64();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if a[pivot][col].is_zero() {
            let mut found = None;
            for (row, r) in a.iter().enumerate().skip(col) {
                if !r[col].is_zero() {
                    found = Some(row);
                    break;
                }
            }
            pivot = found.ok_or(Error::SingularMetric)?;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / d.clone();
            inv[col][j] = inv[col][j].clone() / d.clone();
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].clone();
            for j in 0..n {
                let s = a[col][j].clone() * f.clone();
                a[row][j] = a[row][j].clone() - s;
                let s = inv[col][j].clone() * f.clone();
                inv[row][j] = inv[row][j].clone() - s;
            }
        }
    }
    Ok(inv)
}

pub fn to_nalgebra(m: &Mat<C64>) -> DMatrix<C64> {
    let n = m.len();
    let cols = if n == 0 { 0 } else { m[0].len() };
    DMatrix::from_fn(n, cols, |i, j| m[i][j])
}

pub fn from_nalgebra(m: &DMatrix<C64>) -> Mat<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Entrywise conversion, exact for dyadic inputs.
pub fn convert<S: Scalar>(m: &Mat<C64>) -> Mat<S> {
    m.iter()
        .map(|row| row.iter().map(|z| S::from_parts(z.re, z.im)).collect())
        .collect()
}

pub fn max_abs_diff<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> f64 {
    let mut worst: f64 = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x.clone() - y.clone()).abs_f64());
        }
    }
    worst
}

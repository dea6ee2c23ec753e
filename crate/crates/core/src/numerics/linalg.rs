use std::ops::{Index, IndexMut};

use crate::error::{CmabError, Result};

/// Pivots in `[-PIVOT_TOLERANCE, 0]` are treated as exact zeros.
pub const PIVOT_TOLERANCE: f64 = 1e-10;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// `diag` on the diagonal and `off` everywhere else.
    pub fn equicorrelated(n: usize, diag: f64, off: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if i == j { diag } else { off };
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(CmabError::Structural(
                "matrix rows must all have length n".into(),
            ));
        }
        Ok(Matrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `L * z` for a lower-triangular `self`, skipping the zero upper half.
    pub fn lower_mul_vec(&self, z: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..=i).map(|k| self[(i, k)] * z[k]).sum())
            .collect()
    }

    /// `self * self^T`.
    pub fn gram(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| {
            self.row(i)
                .iter()
                .zip(self.row(j))
                .map(|(a, b)| a * b)
                .sum()
        })
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), |a, b| self[(idx[a], idx[b])])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower Cholesky factor `L` with `L L^T = sigma`.
///
/// Rank-deficient PSD input is accepted: a pivot within `PIVOT_TOLERANCE`
/// below zero is flattened to zero and its column is zeroed. So is a
/// positive pivot at rounding level relative to the diagonal, since
/// dividing by it would amplify the rounding error into later pivots.
/// A pivot below `-PIVOT_TOLERANCE` yields [`CmabError::NotPsd`].
pub fn cholesky(sigma: &Matrix) -> Result<Matrix> {
    let n = sigma.n();
    if !sigma.is_finite() {
        return Err(CmabError::Domain(
            "covariance has non-finite entries".into(),
        ));
    }
    if !sigma.is_symmetric(1e-9 * (1.0 + sigma.data.iter().fold(0.0f64, |m, x| m.max(x.abs())))) {
        return Err(CmabError::Precondition(
            "covariance must be symmetric".into(),
        ));
    }
    let max_diag = (0..n).map(|i| sigma[(i, i)].abs()).fold(0.0, f64::max);
    let negligible = 64.0 * n as f64 * f64::EPSILON * max_diag;
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut pivot = sigma[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot < -PIVOT_TOLERANCE {
            return Err(CmabError::NotPsd { row: j, pivot });
        }
        if pivot <= negligible {
            continue;
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = sigma[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factor() {
        let l = cholesky(&Matrix::identity(4)).unwrap();
        assert_eq!(l, Matrix::identity(4));
    }

    #[test]
    fn hand_factorization() {
        let s = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        let l = cholesky(&s).unwrap();
        let expected = Matrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert!(l.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn indefinite_rejected() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky(&s),
            Err(CmabError::NotPsd { row: 1, .. })
        ));
    }

    #[test]
    fn rank_deficient_accepted() {
        // All-ones matrix has rank one.
        let s = Matrix::equicorrelated(5, 1.0, 1.0);
        let l = cholesky(&s).unwrap();
        assert!(l.gram().max_abs_diff(&s) < 1e-12);
        // Equicorrelation at the singular point -1/(n-1).
        let s = Matrix::equicorrelated(4, 1.0, -1.0 / 3.0);
        let l = cholesky(&s).unwrap();
        assert!(l.gram().max_abs_diff(&s) < 1e-10);
    }

    #[test]
    fn reconstructs_random_spd() {
        let a = Matrix::from_fn(6, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 1.0 } else { 0.0 }
        });
        let s = Matrix::from_fn(6, |i, j| a.gram()[(i, j)] + if i == j { 0.5 } else { 0.0 });
        let l = cholesky(&s).unwrap();
        assert!(l.gram().max_abs_diff(&s) < 1e-8);
    }
}

//! Small dense linear algebra on flat row-major buffers.
//!
//! The correlation filters evaluate one N×N factorization per observation
//! inside the likelihood, so these routines work on caller-owned slices and
//! never allocate.

use nalgebra::{DMatrix, SymmetricEigen};

/// Row-major T×N matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length must equal rows*cols");
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        let mut data = Vec::with_capacity(rows * cols);
        for t in 0..rows {
            data.extend(columns.iter().map(|c| c[t]));
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.cols..(t + 1) * self.cols]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.data[t * self.cols..(t + 1) * self.cols]
    }

    pub fn get(&self, t: usize, i: usize) -> f64 {
        self.data[t * self.cols + i]
    }

    pub fn set(&mut self, t: usize, i: usize, v: f64) {
        self.data[t * self.cols + i] = v;
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.rows).map(|t| self.get(t, i)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows `start..` as a new matrix.
    pub fn tail_rows(&self, start: usize) -> Self {
        Self {
            rows: self.rows - start,
            cols: self.cols,
            data: self.data[start * self.cols..].to_vec(),
        }
    }
}

/// In-place lower Cholesky factorization of a symmetric n×n matrix.
/// Returns false if a pivot is not strictly positive.
pub fn cholesky_in_place(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
        for k in j + 1..n {
            a[j * n + k] = 0.0;
        }
    }
    true
}

/// `log|M|` and `x' M⁻¹ x` from one Cholesky factorization of `m`.
///
/// `work` must hold at least `n*n + n` values. Returns `None` when `m` is
/// not numerically positive definite.
pub fn logdet_and_quadratic(m: &[f64], x: &[f64], n: usize, work: &mut [f64]) -> Option<(f64, f64)> {
    let (l, z) = work.split_at_mut(n * n);
    l.copy_from_slice(&m[..n * n]);
    if !cholesky_in_place(l, n) {
        return None;
    }
    let mut logdet = 0.0;
    let mut quad = 0.0;
    // forward substitution L z = x
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        let lii = l[i * n + i];
        z[i] = s / lii;
        logdet += lii.ln();
        quad += z[i] * z[i];
    }
    Some((2.0 * logdet, quad))
}

/// Smallest eigenvalue of a symmetric n×n row-major matrix.
pub fn min_eigenvalue(m: &[f64], n: usize) -> f64 {
    match n {
        0 => f64::INFINITY,
        1 => m[0],
        2 => {
            let (a, b, d) = (m[0], 0.5 * (m[1] + m[2]), m[3]);
            let half_tr = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            half_tr - disc
        }
        _ => {
            let mat = DMatrix::from_row_slice(n, n, m);
            // NaN on non-convergence: every caller treats it as "not PD"
            SymmetricEigen::try_new(mat, f64::EPSILON, 1000)
                .map_or(f64::NAN, |e| e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
        }
    }
}

/// Inverse of a symmetric matrix, `None` when singular or indefinite.
pub fn invert_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| c.inverse())
}

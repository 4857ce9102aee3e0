//! Dense row-major matrix storage and the handful of operations the
//! simulator needs. Heavy kernels (matrix products, eigenvalues) are
//! delegated to `faer`; the thin wrapper exists so the rest of the crate can
//! pass matrices around as plain serializable data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Row-major dense matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries, `data[i * cols + j]`.
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = DenseMatrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::diag(&vec![1.0; n])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `out = self · x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            *o = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    /// `diag(s) · self`: scales row `i` by `s[i]`.
    pub fn scale_rows(&self, s: &[f64]) -> DenseMatrix {
        debug_assert_eq!(s.len(), self.rows);
        let mut m = self.clone();
        for i in 0..self.rows {
            let si = s[i];
            for v in m.row_mut(i) {
                *v *= si;
            }
        }
        m
    }

    /// `self · diag(s)`: scales column `j` by `s[j]`.
    pub fn scale_cols(&self, s: &[f64]) -> DenseMatrix {
        debug_assert_eq!(s.len(), self.cols);
        let mut m = self.clone();
        for i in 0..self.rows {
            for (v, &sj) in m.row_mut(i).iter_mut().zip(s.iter()) {
                *v *= sj;
            }
        }
        m
    }

    /// `diag(r) · self · diag(c)` in one pass.
    pub fn scale_rows_cols(&self, r: &[f64], c: &[f64]) -> DenseMatrix {
        debug_assert_eq!(r.len(), self.rows);
        debug_assert_eq!(c.len(), self.cols);
        let mut m = self.clone();
        for i in 0..self.rows {
            let ri = r[i];
            for (v, &cj) in m.row_mut(i).iter_mut().zip(c.iter()) {
                *v *= ri * cj;
            }
        }
        m
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    /// Adds `s[i]` to the diagonal entry `(i, i)`.
    pub fn add_diag_assign(&mut self, s: &[f64]) {
        debug_assert_eq!(self.rows, self.cols);
        for (i, &v) in s.iter().enumerate() {
            self.data[i * self.cols + i] += v;
        }
    }

    /// `self · other` through faer's GEMM.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let a = self.to_faer();
        let b = other.to_faer();
        DenseMatrix::from_faer(&(&a * &b))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Lower-triangular Cholesky factor of a symmetric positive-definite
    /// matrix, or `None` when a pivot is not strictly positive. Only the
    /// lower triangle of `self` is read.
    pub fn cholesky_lower(&self) -> Option<DenseMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                let v = l.get(j, k);
                d -= v * v;
            }
            if !(d > 0.0) {
                return None;
            }
            let dj = d.sqrt();
            l.set(j, j, dj);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / dj);
            }
        }
        Some(l)
    }

    pub fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub fn from_faer(m: &faer::Mat<f64>) -> DenseMatrix {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Assembles `[[tl, tr], [bl, br]]`. All blocks must be square of equal
    /// size.
    pub fn compose_2x2(
        tl: &DenseMatrix,
        tr: &DenseMatrix,
        bl: &DenseMatrix,
        br: &DenseMatrix,
    ) -> DenseMatrix {
        let n = tl.rows;
        for b in [tl, tr, bl, br] {
            assert_eq!((b.rows, b.cols), (n, n));
        }
        let mut m = DenseMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            m.row_mut(i)[..n].copy_from_slice(tl.row(i));
            m.row_mut(i)[n..].copy_from_slice(tr.row(i));
            m.row_mut(n + i)[..n].copy_from_slice(bl.row(i));
            m.row_mut(n + i)[n..].copy_from_slice(br.row(i));
        }
        m
    }
}

/// Sorts eigenvalues into the canonical order used everywhere in this crate:
/// ascending by real part, ties by imaginary part.
pub fn sort_complex(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("eigenvalues must not be NaN")
    });
}

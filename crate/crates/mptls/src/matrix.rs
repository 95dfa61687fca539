//! Dense column-major matrix storage over the f64 substrate.

use crate::error::{Error, Result};
use crate::precision::FpFormat;
use std::ops::{Index, IndexMut};

/// Dense m×n matrix, column-major entries in the host substrate (f64).
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from row slices (each inner slice is one row).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::DimensionMismatch("empty row list".into()));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("ragged row lengths".into()));
        }
        Ok(Matrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Contiguous column slice.
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row_vec(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Elementwise rounding into a simulated format.
    pub fn rounded(&self, fmt: &FpFormat) -> Matrix {
        if fmt.is_substrate() {
            return self.clone();
        }
        let mut out = self.clone();
        for v in &mut out.data {
            *v = fmt.round(*v);
        }
        out
    }

    /// [A b] augmentation.
    pub fn hcat_vec(&self, v: &[f64]) -> Result<Matrix> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "hcat: {} rows vs vector length {}",
                self.rows,
                v.len()
            )));
        }
        let mut out = Matrix::zeros(self.rows, self.cols + 1);
        out.data[..self.rows * self.cols].copy_from_slice(&self.data);
        out.col_mut(self.cols).copy_from_slice(v);
        Ok(out)
    }

    /// Column-scaled copy A·diag(s).
    pub fn scale_cols(&self, s: &[f64]) -> Matrix {
        assert_eq!(s.len(), self.cols);
        let mut out = self.clone();
        for j in 0..self.cols {
            for v in out.col_mut(j) {
                *v *= s[j];
            }
        }
        out
    }

    pub fn is_all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Frobenius norm with compensated summation.
    pub fn frobenius_norm(&self) -> f64 {
        crate::accurate::dot(&self.data, &self.data).sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

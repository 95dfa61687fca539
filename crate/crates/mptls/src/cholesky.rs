//! Cholesky factorization of the normal-equations (Gram) matrix, with an
//! optional symmetric diagonal scaling that makes the factorization survive
//! narrow exponent ranges.
//!
//! The scaled path forms G = AᵀA and the column norms in the f64 substrate,
//! scales to H = D⁻¹ G D⁻¹ (unit diagonal), stores H once in the target
//! format, and factors H there. Squared column norms that overflow the target
//! format never appear, so badly column-scaled matrices factor successfully
//! where the direct route saturates. The unscaled path forms and factors G
//! entirely in the target format and is kept as the contrast case.

use crate::accurate;
use crate::error::{Error, Result};
use crate::flops::{charges, Kernel};
use crate::kernels::{self, Runtime};
use crate::matrix::Matrix;
use crate::precision::FpFormat;

/// Upper-triangular Cholesky factor of (possibly scaled) AᵀA.
///
/// When `d` is present the stored triangle factors H = D⁻¹ (AᵀA) D⁻¹ and the
/// factor of AᵀA itself is R·D; when absent the triangle factors AᵀA
/// directly.
#[derive(Debug, Clone)]
pub struct CholeskyFactors {
    r: Matrix,
    d: Option<Vec<f64>>,
}

/// Factors AᵀA in `fmt` after symmetric diagonal equilibration.
pub fn cholesky_scaled(rt: &mut Runtime, fmt: &FpFormat, a: &Matrix) -> Result<CholeskyFactors> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::InvalidParameter(format!(
            "cholesky requires rows >= cols, got {m}x{n}"
        )));
    }
    rt.tally.charge(Kernel::Gram, &fmt.name, charges::gram(m, n));
    let g = accurate::gram(a);
    let mut d = vec![0.0; n];
    for i in 0..n {
        d[i] = g[(i, i)].sqrt();
        if d[i] == 0.0 || !d[i].is_finite() {
            return Err(Error::RankDeficient(format!(
                "column {i} has unusable norm {}",
                d[i]
            )));
        }
    }
    // Square roots plus one divide per stored entry of the scaled matrix.
    rt.tally.charge(
        Kernel::DiagScale,
        &fmt.name,
        charges::diag_scale(n) + n as u64 * n as u64,
    );
    let mut h = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            h[(i, j)] = rt.round(fmt, g[(i, j)] / (d[i] * d[j]));
        }
    }
    let r = factor_upper(rt, fmt, &h)?;
    Ok(CholeskyFactors { r, d: Some(d) })
}

/// Forms AᵀA with per-operation rounding in `fmt` and factors it there.
pub fn cholesky_unscaled(rt: &mut Runtime, fmt: &FpFormat, a: &Matrix) -> Result<CholeskyFactors> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::InvalidParameter(format!(
            "cholesky requires rows >= cols, got {m}x{n}"
        )));
    }
    rt.tally.charge(Kernel::Gram, &fmt.name, charges::gram(m, n));
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernels::dot_uncharged(rt, fmt, a.col(i), a.col(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let r = factor_upper(rt, fmt, &g)?;
    Ok(CholeskyFactors { r, d: None })
}

/// Dot-product-form Cholesky of a symmetric matrix already stored in `fmt`;
/// returns the upper factor R with RᵀR = H. A nonpositive or non-finite
/// pivot aborts with the offending value.
pub fn factor_upper(rt: &mut Runtime, fmt: &FpFormat, h: &Matrix) -> Result<Matrix> {
    let n = h.rows();
    if h.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky factor expects a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    rt.tally
        .charge(Kernel::Cholesky, &fmt.name, charges::cholesky(n));
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let mut s = h[(i, j)];
            for k in 0..i {
                let p = rt.round(fmt, r[(k, i)] * r[(k, j)]);
                s = rt.round(fmt, s - p);
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::CholeskyBreakdown { index: i, pivot: s });
                }
                r[(i, j)] = rt.round(fmt, s.sqrt());
            } else {
                r[(i, j)] = rt.div(fmt, s, r[(i, i)]);
            }
        }
    }
    Ok(r)
}

impl CholeskyFactors {
    pub fn dim(&self) -> usize {
        self.r.rows()
    }

    /// The stored upper triangle (of H when scaled, of AᵀA when not).
    pub fn r(&self) -> &Matrix {
        &self.r
    }

    /// The equivalent upper-triangular factor of AᵀA itself (R·D when
    /// scaled). Its diagonal is nonnegative, so it is directly comparable to
    /// the R from a Householder factorization of A.
    pub fn r_of_gram(&self) -> Matrix {
        match &self.d {
            None => self.r.clone(),
            Some(d) => {
                let n = self.dim();
                Matrix::from_fn(n, n, |i, j| self.r[(i, j)] * d[j])
            }
        }
    }

    /// Solves (R·D)ᵀ y = f, i.e. y = R⁻ᵀ D⁻¹ f, in `fmt`.
    pub fn rinv_t(&self, rt: &mut Runtime, fmt: &FpFormat, f: &[f64]) -> Result<Vec<f64>> {
        let w = match &self.d {
            None => f.to_vec(),
            Some(d) => {
                rt.tally
                    .charge(Kernel::DiagScale, &fmt.name, charges::diag_scale(d.len()));
                f.iter()
                    .zip(d)
                    .map(|(fi, di)| rt.div(fmt, *fi, *di))
                    .collect()
            }
        };
        kernels::tri_solve(rt, fmt, &self.r, &w, true)
    }

    /// Solves (R·D) y = p, i.e. y = D⁻¹ R⁻¹ p, in `fmt`.
    pub fn rinv(&self, rt: &mut Runtime, fmt: &FpFormat, p: &[f64]) -> Result<Vec<f64>> {
        let y = kernels::tri_solve(rt, fmt, &self.r, p, false)?;
        match &self.d {
            None => Ok(y),
            Some(d) => {
                rt.tally
                    .charge(Kernel::DiagScale, &fmt.name, charges::diag_scale(d.len()));
                Ok(y.iter().zip(d).map(|(yi, di)| rt.div(fmt, *yi, *di)).collect())
            }
        }
    }
}

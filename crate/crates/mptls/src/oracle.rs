//! Reference total-least-squares solutions computed from the singular value
//! decomposition of the augmented matrix [A b] in the f64 substrate.
//!
//! The minimizing x is read off the right singular vector belonging to the
//! smallest singular value of [A b]; that value's square is the minimal
//! weighted residual. Solutions are only well defined when that smallest
//! singular value is separated from σ_min(A), so the relative gap is checked
//! and reported.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::svd;

/// Relative gap below which the minimizer is treated as non-unique.
pub const UNIQUENESS_GAP_TOL: f64 = 1e-12;
/// Relative size of σ_min([A b]) below which the system counts as consistent.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Exact solution data for one total-least-squares instance.
#[derive(Debug, Clone)]
pub struct TlsSolution {
    /// The minimizing coefficient vector.
    pub x: Vec<f64>,
    /// σ_min([A b]); its square is the minimal residual value.
    pub sigma: f64,
    /// σ_min([A b])².
    pub sigma_sq: f64,
    /// Singular values of [A b], descending (length n+1).
    pub sv_augmented: Vec<f64>,
    /// Singular values of A alone, descending (length n).
    pub sv_a: Vec<f64>,
    /// (σ_min(A) − σ_min([A b])) / σ_max(A): uniqueness margin.
    pub relative_gap: f64,
    /// True when σ_min([A b]) is negligible relative to σ_max([A b]).
    pub consistent: bool,
    /// σ_max(A) / (σ_min(A) − σ_min([A b])): sensitivity of x.
    pub condition_tls: f64,
    /// ‖A‖_F / σ_min(A): growth factor governing the Gram matrix.
    pub condition_frobenius: f64,
}

/// Solves min ‖[E f]‖_F subject to (A+E)x = b+f via the augmented SVD.
pub fn tls_solve_exact(a: &Matrix, b: &[f64]) -> Result<TlsSolution> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {m}x{n} but right-hand side has length {}",
            b.len()
        )));
    }
    if m < n + 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least n+1 = {} rows, got {m}",
            n + 1
        )));
    }
    let aug = a.hcat_vec(b)?;
    let f_aug = svd::svd(&aug)?;
    let sv_a = svd::singular_values(a)?;

    let sigma = f_aug.s[n];
    let gap = (sv_a[n - 1] - sigma) / sv_a[0].max(f64::MIN_POSITIVE);
    let last = f_aug.v[(n, n)];
    if gap <= UNIQUENESS_GAP_TOL || last == 0.0 {
        return Err(Error::NonUniqueTls { relative_gap: gap });
    }
    let x: Vec<f64> = (0..n).map(|i| -f_aug.v[(i, n)] / last).collect();
    let consistent = sigma <= CONSISTENCY_TOL * f_aug.s[0];
    let condition_tls = sv_a[0] / (sv_a[n - 1] - sigma);
    let condition_frobenius = a.frobenius_norm() / sv_a[n - 1];
    Ok(TlsSolution {
        x,
        sigma,
        sigma_sq: sigma * sigma,
        sv_augmented: f_aug.s,
        sv_a,
        relative_gap: gap,
        consistent,
        condition_tls,
        condition_frobenius,
    })
}

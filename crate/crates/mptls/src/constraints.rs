//! Upper bounds on the factorization-precision unit roundoff under which the
//! preconditioned normal-equations operator stays positive definite, plus the
//! eigenvalue enclosure for the preconditioned operator in a given format.
//!
//! All bounds are derived from substrate-quality singular values of A and
//! [A b]. A format "passes" a bound when its unit roundoff is strictly below
//! it; the report recommends the coarsest candidate format that passes both
//! the condition-number heuristic and the right-hand-side-aware bound.

use crate::error::Result;
use crate::matrix::Matrix;
use crate::oracle::{self, TlsSolution};
use crate::precision::FpFormat;
use crate::svd;
use serde::Serialize;

/// Eigenvalue enclosure for the preconditioned operator R̂⁻ᵀ(AᵀA − σ²I)R̂⁻¹
/// when R̂ comes from a factorization carried out at unit roundoff u_q.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenInterval {
    pub lower: f64,
    pub upper: f64,
    /// True when the whole enclosure lies strictly above zero.
    pub positive_definite_guaranteed: bool,
}

/// Per-candidate-format verdicts against every bound.
#[derive(Debug, Clone, Serialize)]
pub struct FormatAssessment {
    pub format: String,
    pub unit_roundoff: f64,
    pub passes_heuristic: bool,
    pub passes_rhs: bool,
    pub passes_qr_det: bool,
    pub passes_qr_prob: bool,
    pub passes_chol: bool,
    pub passes_chol_scaled: bool,
    /// Worst-case perturbation size √m·γ̃·(‖A‖_F/σ_min(A)) at this roundoff.
    pub delta_bound: f64,
    pub eigen_interval: EigenInterval,
}

/// All precision bounds for one problem instance plus per-format verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct PrecisionConstraintReport {
    pub rows: usize,
    pub cols: usize,
    /// κ₂(A) = σ_max(A)/σ_min(A).
    pub condition_a: f64,
    /// ‖A‖_F/σ_min(A).
    pub condition_frobenius: f64,
    /// σ_min([A b])² / σ_min(A)².
    pub sigma_ratio_sq: f64,
    pub bound_qr_det: f64,
    pub bound_qr_prob: f64,
    pub bound_heuristic: f64,
    pub bound_rhs: f64,
    pub bound_chol: f64,
    pub bound_chol_scaled: f64,
    /// The dimensional constant used in the bounds.
    pub constant: f64,
    pub formats: Vec<FormatAssessment>,
    /// Coarsest candidate passing both the heuristic and rhs bounds.
    pub recommended: Option<String>,
}

/// γ̃ = c·m·n·u / (1 − c·m·n·u), or +∞ once c·m·n·u ≥ 1.
fn gamma_tilde(c: f64, m: usize, n: usize, u: f64) -> f64 {
    let g = c * m as f64 * n as f64 * u;
    if g >= 1.0 {
        f64::INFINITY
    } else {
        g / (1.0 - g)
    }
}

/// Smallest eigenvalue of the column-equilibrated Gram matrix, i.e.
/// σ_min(A·D⁻¹)² with D the diagonal of column norms.
fn lambda_min_equilibrated(a: &Matrix) -> Result<f64> {
    let n = a.cols();
    let mut inv_norms = vec![0.0; n];
    for j in 0..n {
        let nj = crate::accurate::norm2(a.col(j));
        if nj == 0.0 || !nj.is_finite() {
            return Err(crate::error::Error::RankDeficient(format!(
                "column {j} has unusable norm {nj}"
            )));
        }
        inv_norms[j] = 1.0 / nj;
    }
    let scaled = a.scale_cols(&inv_norms);
    let sv = svd::singular_values(&scaled)?;
    Ok(sv[n - 1] * sv[n - 1])
}

fn interval_from_parts(sigma_ratio_sq: f64, delta: f64) -> EigenInterval {
    let lower = 1.0 - sigma_ratio_sq - delta;
    let upper = 1.0 + delta;
    EigenInterval {
        lower,
        upper,
        positive_definite_guaranteed: lower > 0.0,
    }
}

/// Eigenvalue enclosure for the preconditioned operator when the
/// factorization runs in `uq`, with dimensional constant `c`.
pub fn preconditioner_eigen_interval_with_constant(
    a: &Matrix,
    b: &[f64],
    uq: &FpFormat,
    c: f64,
) -> Result<EigenInterval> {
    let sol = oracle::tls_solve_exact(a, b)?;
    Ok(interval_for_solution(a, &sol, uq, c))
}

/// Same enclosure with the default constant c = 1.
pub fn preconditioner_eigen_interval(a: &Matrix, b: &[f64], uq: &FpFormat) -> Result<EigenInterval> {
    preconditioner_eigen_interval_with_constant(a, b, uq, 1.0)
}

fn interval_for_solution(a: &Matrix, sol: &TlsSolution, uq: &FpFormat, c: f64) -> EigenInterval {
    let n = a.cols();
    let sigma_ratio_sq = (sol.sigma / sol.sv_a[n - 1]).powi(2);
    let gt = gamma_tilde(c, a.rows(), n, uq.unit_roundoff());
    let delta = (a.rows() as f64).sqrt() * gt * sol.condition_frobenius;
    interval_from_parts(sigma_ratio_sq, delta)
}

/// Evaluates every precision bound for `a`, `b` and assesses each candidate
/// format. `c` is the dimensional constant (use 1.0 by default).
pub fn evaluate_uq_constraints(
    a: &Matrix,
    b: &[f64],
    c: f64,
    candidates: &[FpFormat],
) -> Result<PrecisionConstraintReport> {
    let sol = oracle::tls_solve_exact(a, b)?;
    let (m, n) = (a.rows(), a.cols());
    let kappa = sol.sv_a[0] / sol.sv_a[n - 1];
    let kf = sol.condition_frobenius;
    let sigma_ratio_sq = (sol.sigma / sol.sv_a[n - 1]).powi(2);
    let ratio_term = 1.0 - sigma_ratio_sq;
    let lam = lambda_min_equilibrated(a)?;

    let bound_qr_det = 1.0 / (c * m as f64 * (n as f64).powf(1.5) * kappa);
    let bound_qr_prob = 1.0 / (c * (m as f64).sqrt() * (n as f64).powf(0.75) * kappa);
    let bound_heuristic = 1.0 / kappa;
    let bound_rhs = ratio_term / kf;
    let bound_chol = 1.0 / (20.0 * (n as f64).powf(1.5) * kappa * kappa);
    let bound_chol_scaled = lam / ((2.0 * lam + n as f64) * (n as f64 + 1.0));

    let mut formats: Vec<FormatAssessment> = candidates
        .iter()
        .map(|fmt| {
            let u = fmt.unit_roundoff();
            let gt = gamma_tilde(c, m, n, u);
            let delta = (m as f64).sqrt() * gt * kf;
            FormatAssessment {
                format: fmt.name.clone(),
                unit_roundoff: u,
                passes_heuristic: u < bound_heuristic,
                passes_rhs: u < bound_rhs,
                passes_qr_det: u < bound_qr_det,
                passes_qr_prob: u < bound_qr_prob,
                passes_chol: u < bound_chol,
                passes_chol_scaled: u < bound_chol_scaled,
                delta_bound: delta,
                eigen_interval: interval_from_parts(sigma_ratio_sq, delta),
            }
        })
        .collect();
    // Coarsest (largest roundoff) first for the recommendation scan.
    formats.sort_by(|x, y| y.unit_roundoff.partial_cmp(&x.unit_roundoff).unwrap());
    let recommended = formats
        .iter()
        .find(|f| f.passes_heuristic && f.passes_rhs)
        .map(|f| f.format.clone());

    Ok(PrecisionConstraintReport {
        rows: m,
        cols: n,
        condition_a: kappa,
        condition_frobenius: kf,
        sigma_ratio_sq,
        bound_qr_det,
        bound_qr_prob,
        bound_heuristic,
        bound_rhs,
        bound_chol,
        bound_chol_scaled,
        constant: c,
        formats,
        recommended,
    })
}

/// Default candidate set: half, single, double.
pub fn default_candidates() -> Vec<FpFormat> {
    vec![FpFormat::fp16(), FpFormat::fp32(), FpFormat::fp64()]
}

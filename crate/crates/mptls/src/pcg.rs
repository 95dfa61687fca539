//! Preconditioned conjugate gradients for shifted normal equations:
//! given an upper-triangular R with RᵀR ≈ AᵀA, approximately solves
//! (AᵀA − σ²I) ω = f using R as a preconditioner, running a fixed number of
//! steps in a (possibly reduced-precision) format.
//!
//! The shifted operator loses positive definiteness once σ² reaches the
//! smallest eigenvalue of the preconditioned matrix, which the iteration
//! detects through the sign of its curvature scalar δ = ‖p‖² − σ²‖R⁻¹p‖².

use crate::cholesky::CholeskyFactors;
use crate::error::Result;
use crate::kernels::{self, Runtime};
use crate::matrix::Matrix;
use crate::precision::FpFormat;
use serde::Serialize;

/// Triangular preconditioner: either the R factor of a Householder
/// factorization of A, or a Cholesky factor of AᵀA (optionally scaled).
#[derive(Debug, Clone)]
pub enum Preconditioner {
    /// Upper-triangular R with RᵀR ≈ AᵀA.
    Triangular(Matrix),
    /// Factorization of AᵀA, possibly with diagonal equilibration.
    Normal(CholeskyFactors),
}

impl Preconditioner {
    pub fn dim(&self) -> usize {
        match self {
            Preconditioner::Triangular(r) => r.cols(),
            Preconditioner::Normal(f) => f.dim(),
        }
    }

    /// R⁻ᵀ v in `fmt`.
    pub fn rinv_t(&self, rt: &mut Runtime, fmt: &FpFormat, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            Preconditioner::Triangular(r) => kernels::tri_solve(rt, fmt, r, v, true),
            Preconditioner::Normal(f) => f.rinv_t(rt, fmt, v),
        }
    }

    /// R⁻¹ v in `fmt`.
    pub fn rinv(&self, rt: &mut Runtime, fmt: &FpFormat, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            Preconditioner::Triangular(r) => kernels::tri_solve(rt, fmt, r, v, false),
            Preconditioner::Normal(f) => f.rinv(rt, fmt, v),
        }
    }
}

/// Why an inner solve stopped before its step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PcgBreakdown {
    /// δ = 0 exactly: the search direction carries no curvature.
    ZeroCurvature,
    /// δ < 0 or NaN: the shifted operator is not positive definite here.
    LostPositiveDefiniteness,
}

impl PcgBreakdown {
    pub fn as_str(&self) -> &'static str {
        match self {
            PcgBreakdown::ZeroCurvature => "zero_curvature",
            PcgBreakdown::LostPositiveDefiniteness => "lost_positive_definiteness",
        }
    }
}

/// Result of one inner solve: the accumulated update, the number of completed
/// steps, and the breakdown reason if the curvature test failed.
#[derive(Debug, Clone)]
pub struct PcgOutcome {
    pub omega: Vec<f64>,
    pub iterations: usize,
    pub breakdown: Option<PcgBreakdown>,
}

/// Runs at most `budget` preconditioned CG steps on (AᵀA − σ²I) ω = f in
/// `fmt`. Returns the last iterate even on breakdown; a vanished residual
/// (η = 0) ends the loop cleanly.
pub fn pcgtls_solve(
    rt: &mut Runtime,
    fmt: &FpFormat,
    precond: &Preconditioner,
    sigma_sq: f64,
    f: &[f64],
    budget: usize,
) -> Result<PcgOutcome> {
    let n = precond.dim();
    debug_assert_eq!(f.len(), n);
    let mut s = precond.rinv_t(rt, fmt, f)?;
    let mut p = s.clone();
    let mut omega = vec![0.0; n];
    let mut eta = kernels::dot(rt, fmt, &s, &s);
    let mut j = 0;
    while j < budget {
        if eta == 0.0 {
            break;
        }
        let q = precond.rinv(rt, fmt, &p)?;
        let pp = kernels::dot(rt, fmt, &p, &p);
        let qq = kernels::dot(rt, fmt, &q, &q);
        let shift = rt.round(fmt, sigma_sq * qq);
        let delta = rt.round(fmt, pp - shift);
        if !(delta > 0.0) {
            let kind = if delta == 0.0 {
                PcgBreakdown::ZeroCurvature
            } else {
                PcgBreakdown::LostPositiveDefiniteness
            };
            return Ok(PcgOutcome {
                omega,
                iterations: j,
                breakdown: Some(kind),
            });
        }
        let alpha = rt.div(fmt, eta, delta);
        omega = kernels::axpy(rt, fmt, alpha, &q, &omega);
        let qt = precond.rinv_t(rt, fmt, &q)?;
        let t = kernels::axpy(rt, fmt, -sigma_sq, &qt, &p);
        s = kernels::axpy(rt, fmt, -alpha, &t, &s);
        let eta_next = kernels::dot(rt, fmt, &s, &s);
        let beta = rt.div(fmt, eta_next, eta);
        p = kernels::axpy(rt, fmt, beta, &p, &s);
        eta = eta_next;
        j += 1;
    }
    Ok(PcgOutcome {
        omega,
        iterations: j,
        breakdown: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accurate;
    use crate::qr::householder_qr;
    use rand::{Rng, SeedableRng};

    fn fp64() -> FpFormat {
        FpFormat::fp64()
    }

    fn qr_precond(a: &Matrix) -> Preconditioner {
        let mut rt = Runtime::new();
        Preconditioner::Triangular(householder_qr(&mut rt, &fp64(), a).unwrap().r())
    }

    #[test]
    fn identity_with_zero_shift_converges_in_one_step() {
        let pre = Preconditioner::Triangular(Matrix::identity(3));
        let mut rt = Runtime::new();
        let out = pcgtls_solve(&mut rt, &fp64(), &pre, 0.0, &[1.0, 2.0, 3.0], 5).unwrap();
        assert!(out.breakdown.is_none());
        assert_eq!(out.omega, vec![1.0, 2.0, 3.0]);
        assert!(out.iterations <= 2);
    }

    #[test]
    fn zero_rhs_is_a_clean_no_op() {
        let pre = Preconditioner::Triangular(Matrix::identity(4));
        let mut rt = Runtime::new();
        let out = pcgtls_solve(&mut rt, &fp64(), &pre, 0.1, &[0.0; 4], 6).unwrap();
        assert_eq!(out.omega, vec![0.0; 4]);
        assert_eq!(out.iterations, 0);
        assert!(out.breakdown.is_none());
    }

    #[test]
    fn zero_shift_matches_normal_equations_solve() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for trial in 0..5 {
            let n = 3 + trial;
            let m = n + 4;
            let a = Matrix::from_fn(m, n, |_, _| rng.random::<f64>() + 0.5);
            let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let want = accurate::solve_dense(&accurate::gram(&a), &f).unwrap();
            let pre = qr_precond(&a);
            let mut rt = Runtime::new();
            let out = pcgtls_solve(&mut rt, &fp64(), &pre, 0.0, &f, n).unwrap();
            assert!(out.breakdown.is_none());
            let err = accurate::relative_error(&out.omega, &want);
            assert!(err < 1e-8, "trial {trial}: rel err {err}");
        }
    }

    #[test]
    fn full_budget_handles_nonzero_shift() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 5;
        let a = Matrix::from_fn(9, n, |_, _| rng.random::<f64>() + 1.0);
        let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        // Shift well below λ_min(AᵀA) keeps the operator positive definite.
        let svs = crate::svd::singular_values(&a).unwrap();
        let sigma_sq = 0.5 * svs[n - 1] * svs[n - 1];
        let mut shifted = accurate::gram(&a);
        for i in 0..n {
            shifted[(i, i)] -= sigma_sq;
        }
        let want = accurate::solve_dense(&shifted, &f).unwrap();
        let pre = qr_precond(&a);
        let mut rt = Runtime::new();
        let out = pcgtls_solve(&mut rt, &fp64(), &pre, sigma_sq, &f, 3 * n).unwrap();
        assert!(out.breakdown.is_none());
        assert!(accurate::relative_error(&out.omega, &want) < 1e-8);
    }

    #[test]
    fn oversized_shift_reports_lost_definiteness() {
        // With A = I the preconditioned curvature is ‖p‖²(1 − σ²) < 0 at σ² = 2.
        let pre = Preconditioner::Triangular(Matrix::identity(2));
        let mut rt = Runtime::new();
        let out = pcgtls_solve(&mut rt, &fp64(), &pre, 2.0, &[1.0, 1.0], 4).unwrap();
        assert_eq!(out.breakdown, Some(PcgBreakdown::LostPositiveDefiniteness));
        assert_eq!(out.iterations, 0);
        assert_eq!(out.omega, vec![0.0, 0.0]);
    }

    #[test]
    fn critical_shift_reports_zero_curvature() {
        // σ² = 1 with A = I makes δ vanish exactly.
        let pre = Preconditioner::Triangular(Matrix::identity(2));
        let mut rt = Runtime::new();
        let out = pcgtls_solve(&mut rt, &fp64(), &pre, 1.0, &[3.0, 4.0], 4).unwrap();
        assert_eq!(out.breakdown, Some(PcgBreakdown::ZeroCurvature));
    }

    #[test]
    fn per_step_operation_count_is_fixed() {
        let n = 6;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        let a = Matrix::from_fn(10, n, |_, _| rng.random::<f64>() + 0.5);
        let pre = qr_precond(&a);
        let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let svs = crate::svd::singular_values(&a).unwrap();
        let sigma_sq = 0.25 * svs[n - 1] * svs[n - 1];

        let mut totals = Vec::new();
        for budget in [1usize, 2, 3] {
            let mut rt = Runtime::new();
            let out = pcgtls_solve(&mut rt, &fp64(), &pre, sigma_sq, &f, budget).unwrap();
            assert_eq!(out.iterations, budget);
            totals.push(rt.tally.total());
        }
        let n64 = n as u64;
        // Setup: one transposed solve plus one inner product.
        assert_eq!(totals[0] - (n64 * n64 + 2 * n64 - 1), 2 * n64 * n64 + 14 * n64 - 3);
        // Each additional step costs exactly the same again.
        assert_eq!(totals[1] - totals[0], 2 * n64 * n64 + 14 * n64 - 3);
        assert_eq!(totals[2] - totals[1], 2 * n64 * n64 + 14 * n64 - 3);
    }

    #[test]
    fn cholesky_preconditioner_is_interchangeable() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
        let n = 4;
        let a = Matrix::from_fn(8, n, |_, _| rng.random::<f64>() + 0.5);
        let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut rt = Runtime::new();
        let ch = crate::cholesky::cholesky_scaled(&mut rt, &fp64(), &a).unwrap();
        let pre = Preconditioner::Normal(ch);
        let want = accurate::solve_dense(&accurate::gram(&a), &f).unwrap();
        let out = pcgtls_solve(&mut rt, &fp64(), &pre, 0.0, &f, n).unwrap();
        assert!(accurate::relative_error(&out.omega, &want) < 1e-8);
    }
}

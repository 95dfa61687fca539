//! Mixed-precision Rayleigh quotient iteration for total least squares.
//!
//! One triangular factorization of A (computed once, in the coarsest format)
//! preconditions every inner conjugate-gradient solve. Each outer step
//! measures the Rayleigh quotient σ² and the normalized gradient norm ψ in
//! the working format, runs two inner solves in the (possibly reduced) inner
//! format with a step budget that grows with the outer index, and applies a
//! scalar-corrected update. Iteration stops when ψ stops improving, and the
//! iterate from the last improving step is returned.

use crate::accurate;
use crate::cholesky;
use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::kernels::{self, Runtime};
use crate::matrix::Matrix;
use crate::oracle::TlsSolution;
use crate::pcg::{pcgtls_solve, PcgBreakdown, Preconditioner};
use crate::precision::{EventCounters, FpFormat};
use crate::qr::{self, QrFactors};
use serde::Serialize;
use std::collections::BTreeMap;

/// Residual threshold below which the bootstrap declares the system
/// consistent and returns the plain least-squares solution.
pub const CONSISTENT_RESIDUAL_TOL: f64 = 1e-12;

/// The three precision levels of a run. `working` carries the outer
/// iteration, `inner` the conjugate-gradient solves, `factorization` the
/// one-time triangular factorization.
#[derive(Debug, Clone)]
pub struct PrecisionConfig {
    pub working: FpFormat,
    pub inner: FpFormat,
    pub factorization: FpFormat,
}

impl PrecisionConfig {
    /// Requires the working format to be at least as accurate as the other two.
    pub fn new(working: FpFormat, inner: FpFormat, factorization: FpFormat) -> Result<Self> {
        let uw = working.unit_roundoff();
        if uw > inner.unit_roundoff() || uw > factorization.unit_roundoff() {
            return Err(Error::InvalidFormat(format!(
                "working format {} must be at least as accurate as inner {} and factorization {}",
                working.name, inner.name, factorization.name
            )));
        }
        Ok(PrecisionConfig {
            working,
            inner,
            factorization,
        })
    }

    pub fn uniform(fmt: FpFormat) -> Self {
        PrecisionConfig {
            working: fmt.clone(),
            inner: fmt.clone(),
            factorization: fmt,
        }
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig::uniform(FpFormat::fp64())
    }
}

/// Termination test on the ψ sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop when ψ_k > ψ_{k−1}; a tie continues.
    Strict,
    /// Stop when ψ_k ≥ ψ_{k−1}; a tie stops.
    Weak,
}

/// Which factorization builds the inner-solve preconditioner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerKind {
    /// R from a Householder factorization of A.
    Qr,
    /// Diagonally equilibrated Cholesky factor of AᵀA.
    Cholesky,
}

/// Step budget for each inner solve at outer index k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InnerBudget {
    /// k + 1 steps at outer iteration k.
    PerOuter,
    /// The same fixed number of steps every time.
    Fixed(usize),
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct RqiOptions {
    pub precisions: PrecisionConfig,
    pub preconditioner: PreconditionerKind,
    pub max_outer: usize,
    pub stop_rule: StopRule,
    pub inner_budget: InnerBudget,
    /// First outer index at which the ψ comparison is armed. The first two
    /// iterates can transiently align with a nearby singular pair, making
    /// ψ₁ spuriously small; comparisons before this index are skipped.
    pub psi_check_start: usize,
    /// Run exactly this many outer iterations, ignoring the ψ test.
    pub force_outer: Option<usize>,
    /// Bootstrap the least-squares solve through the stored reflectors
    /// instead of the stored-triangle normal equations (comparison path;
    /// only meaningful with the QR preconditioner).
    pub ls_via_reflectors: bool,
}

impl Default for RqiOptions {
    fn default() -> Self {
        RqiOptions {
            precisions: PrecisionConfig::default(),
            preconditioner: PreconditionerKind::Qr,
            max_outer: 50,
            stop_rule: StopRule::Strict,
            inner_budget: InnerBudget::PerOuter,
            psi_check_start: 3,
            force_outer: None,
            ls_via_reflectors: false,
        }
    }
}

/// One row of the per-iteration record. Row 0 is the bootstrap; `inner1` and
/// `inner2` are the completed step counts of the two inner solves.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub k: usize,
    pub sigma_sq: f64,
    pub psi: f64,
    pub rerrx: f64,
    pub rerrs: f64,
    pub inner1: usize,
    pub inner2: usize,
    /// Cumulative operation counts per format at the time this row was recorded.
    pub flops_by_format: BTreeMap<String, u64>,
}

/// Why the outer iteration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    /// ψ stopped improving at this outer index; the previous iterate is returned.
    PsiIncrease { at_outer: usize },
    /// The outer-iteration cap was reached.
    MaxOuter,
    /// An inner solve lost positive definiteness or stagnated.
    PcgBreakdown {
        at_outer: usize,
        /// 1 for the gradient solve, 2 for the iterate solve.
        solve: u8,
        kind: PcgBreakdown,
    },
    /// The bootstrap residual vanished: the least-squares solution is exact.
    ConsistentSystem,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::PsiIncrease { .. } => "psi_increase",
            Termination::MaxOuter => "max_outer",
            Termination::PcgBreakdown { .. } => "pcg_breakdown",
            Termination::ConsistentSystem => "consistent_system",
        }
    }
}

/// Full outcome of a solver run.
#[derive(Debug, Clone)]
pub struct RqiResult {
    /// The returned iterate (last improving step).
    pub x: Vec<f64>,
    /// Rayleigh quotient at the returned iterate.
    pub sigma_sq: f64,
    /// Outer index of the returned iterate.
    pub outer_iterations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceRow>,
    /// ‖x − x_ref‖/‖x_ref‖ against the reference solution.
    pub rerrx: f64,
    /// |σ − σ_ref|/σ_ref against the reference singular value.
    pub rerrs: f64,
    pub flops: FlopCounter,
    pub events: EventCounters,
}

/// Normalized gradient norm ((‖f‖² + g²)/(‖x‖² + 1))^½ with every elementary
/// operation rounded into `fmt`. Diagnostic: charges no operations.
pub fn psi(fmt: &FpFormat, f: &[f64], g: f64, x: &[f64]) -> f64 {
    let mut scratch = Runtime::new();
    psi_value(&mut scratch, fmt, f, g, x)
}

fn psi_value(rt: &mut Runtime, fmt: &FpFormat, f: &[f64], g: f64, x: &[f64]) -> f64 {
    let ff = kernels::dot_uncharged(rt, fmt, f, f);
    let gg = rt.round(fmt, g * g);
    let num = rt.round(fmt, ff + gg);
    let xx = kernels::dot_uncharged(rt, fmt, x, x);
    let den = rt.round(fmt, xx + 1.0);
    let q = rt.div(fmt, num, den);
    rt.round(fmt, q.sqrt())
}

/// Gradient data of the Rayleigh-quotient objective at (x, σ²):
/// r = b − Ax, f = −Aᵀr − σ²x, g = σ² − bᵀr.
#[derive(Debug, Clone)]
pub struct NewtonResidual {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub g: f64,
}

/// Computes r, f, g with per-operation rounding in `fmt`, charging the
/// residual, gradient, and scalar-gradient kernels.
pub fn newton_residual(
    rt: &mut Runtime,
    fmt: &FpFormat,
    a: &Matrix,
    b: &[f64],
    x: &[f64],
    sigma_sq: f64,
) -> NewtonResidual {
    let ax = kernels::matvec(rt, fmt, a, x);
    let r = kernels::axpy(rt, fmt, -1.0, &ax, b);
    let (f, g) = newton_from_residual(rt, fmt, a, b, x, sigma_sq, &r);
    NewtonResidual { r, f, g }
}

/// f and g given a precomputed residual r.
fn newton_from_residual(
    rt: &mut Runtime,
    fmt: &FpFormat,
    a: &Matrix,
    b: &[f64],
    x: &[f64],
    sigma_sq: f64,
    r: &[f64],
) -> (Vec<f64>, f64) {
    let y = kernels::matvec_t(rt, fmt, a, r);
    let ny = kernels::vec_negate(rt, fmt, &y);
    let f = kernels::axpy(rt, fmt, -sigma_sq, x, &ny);
    let db = kernels::dot(rt, fmt, b, r);
    let g = rt.round(fmt, sigma_sq - db);
    (f, g)
}

/// Rayleigh quotient rᵀr/(xᵀx + 1) in `fmt` (two charged inner products).
fn rayleigh_quotient(rt: &mut Runtime, fmt: &FpFormat, r: &[f64], x: &[f64]) -> f64 {
    let rr = kernels::dot(rt, fmt, r, r);
    let xx = kernels::dot(rt, fmt, x, x);
    let den = rt.round(fmt, 1.0 + xx);
    rt.div(fmt, rr, den)
}

/// Bootstrap outcome: the least-squares start x₀, its Rayleigh quotient, the
/// first corrected iterate x₁, and the measured ψ₀.
#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub x0: Vec<f64>,
    pub sigma_sq0: f64,
    pub x1: Vec<f64>,
    pub psi0: f64,
    /// ‖b − A x₀‖ in the substrate, for the consistency test.
    pub residual_norm0: f64,
}

/// One inverse-iteration start from the least-squares solution, all in the
/// working format. Expects `a_u`, `b_u` already stored in that format and the
/// preconditioner already factored.
pub fn bootstrap(
    rt: &mut Runtime,
    working: &FpFormat,
    a_u: &Matrix,
    b_u: &[f64],
    precond: &Preconditioner,
    reflectors: Option<&QrFactors>,
) -> Result<BootstrapResult> {
    let n = a_u.cols();
    let x0 = match reflectors {
        // Comparison path: apply the stored reflectors in the substrate and
        // back-substitute once. Off the standard cost accounting.
        Some(f) => {
            let qtb = f.apply_qt(b_u);
            let rhs: Vec<f64> = qtb[..n].iter().map(|v| rt.round(working, *v)).collect();
            match precond {
                Preconditioner::Triangular(r) => kernels::tri_solve(rt, working, r, &rhs, false)?,
                Preconditioner::Normal(_) => {
                    return Err(Error::InvalidParameter(
                        "reflector bootstrap requires the triangular preconditioner".into(),
                    ))
                }
            }
        }
        // Stored-triangle normal equations: RᵀR x₀ = Aᵀb.
        None => {
            let w = kernels::matvec_t(rt, working, a_u, b_u);
            let t = precond.rinv_t(rt, working, &w)?;
            precond.rinv(rt, working, &t)?
        }
    };
    let ax = kernels::matvec(rt, working, a_u, &x0);
    let r0 = kernels::axpy(rt, working, -1.0, &ax, b_u);
    let sigma_sq0 = rayleigh_quotient(rt, working, &r0, &x0);
    let t = precond.rinv_t(rt, working, &x0)?;
    let u0 = precond.rinv(rt, working, &t)?;
    let x1 = kernels::axpy(rt, working, sigma_sq0, &u0, &x0);

    // ψ₀ and its ingredients are diagnostics: rounded like everything else
    // but kept off the operation tally.
    let mut scratch = Runtime::new();
    let y0 = kernels::matvec_t(&mut scratch, working, a_u, &r0);
    let ny0 = kernels::vec_negate(&mut scratch, working, &y0);
    let f0 = kernels::axpy(&mut scratch, working, -sigma_sq0, &x0, &ny0);
    let db = kernels::dot_uncharged(&mut scratch, working, b_u, &r0);
    let g0 = scratch.round(working, sigma_sq0 - db);
    let psi0 = psi_value(&mut scratch, working, &f0, g0, &x0);
    rt.events.merge(&scratch.events);

    Ok(BootstrapResult {
        residual_norm0: accurate::norm2(&r0),
        x0,
        sigma_sq0,
        x1,
        psi0,
    })
}

/// τ = zᵀf − g evaluated two ways in the substrate: through the update
/// recurrence and through block elimination bᵀ(b − Az) − ρ. Both should agree
/// whenever AᵀA − ρI is nonsingular; diagnostic for small problems.
#[derive(Debug, Clone, Copy)]
pub struct TauCheck {
    pub tau_recurrence: f64,
    pub tau_block: f64,
}

pub fn tau_recurrence_check(a: &Matrix, b: &[f64], x: &[f64], rho: f64) -> Result<TauCheck> {
    let n = a.cols();
    let ax = accurate::matvec(a, x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, v)| bi - v).collect();
    let atr = accurate::matvec_t(a, &r);
    let f: Vec<f64> = atr.iter().zip(x).map(|(ai, xi)| -ai - rho * xi).collect();
    let g = rho - accurate::dot(b, &r);
    let mut j = accurate::gram(a);
    for i in 0..n {
        j[(i, i)] -= rho;
    }
    let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
    let omega = accurate::solve_dense(&j, &neg_f)?;
    let z: Vec<f64> = x.iter().zip(&omega).map(|(xi, wi)| xi + wi).collect();
    let tau_recurrence = accurate::dot(&z, &f) - g;
    let az = accurate::matvec(a, &z);
    let bmaz: Vec<f64> = b.iter().zip(&az).map(|(bi, v)| bi - v).collect();
    let tau_block = accurate::dot(b, &bmaz) - rho;
    Ok(TauCheck {
        tau_recurrence,
        tau_block,
    })
}

fn rel_x_err(x: &[f64], x_ref: &[f64]) -> f64 {
    accurate::relative_error(x, x_ref)
}

fn rel_sigma_err(sigma_sq: f64, sigma_ref: f64) -> f64 {
    let s = sigma_sq.max(0.0).sqrt();
    if sigma_ref > 0.0 {
        (s - sigma_ref).abs() / sigma_ref
    } else {
        s
    }
}

/// Runs the full mixed-precision iteration on (a, b) against a reference
/// solution (used only for the error columns of the trace).
pub fn rqi_pcgtls_mp(
    a: &Matrix,
    b: &[f64],
    reference: &TlsSolution,
    opts: &RqiOptions,
) -> Result<RqiResult> {
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
    if opts.max_outer < 1 {
        return Err(Error::InvalidParameter("max_outer must be at least 1".into()));
    }
    let u = &opts.precisions.working;
    let up = &opts.precisions.inner;
    let uq = &opts.precisions.factorization;
    let mut rt = Runtime::new();

    // Storage conversions: substrate data into u, then into u_q for the
    // factorization. Conversions are not operations, but saturation and
    // underflow events are recorded.
    let a_u = round_matrix(&mut rt, u, a);
    let b_u = kernels::round_vec(&mut rt, u, b);
    let a_q = round_matrix(&mut rt, uq, &a_u);

    let mut qr_factors: Option<QrFactors> = None;
    let precond = match opts.preconditioner {
        PreconditionerKind::Qr => {
            let f = qr::householder_qr(&mut rt, uq, &a_q)?;
            let r = f.r();
            qr_factors = Some(f);
            Preconditioner::Triangular(r)
        }
        PreconditionerKind::Cholesky => {
            Preconditioner::Normal(cholesky::cholesky_scaled(&mut rt, uq, &a_q)?)
        }
    };

    let reflectors = if opts.ls_via_reflectors {
        qr_factors.as_ref()
    } else {
        None
    };
    let boot = bootstrap(&mut rt, u, &a_u, &b_u, &precond, reflectors)?;
    let mut trace = vec![TraceRow {
        k: 0,
        sigma_sq: boot.sigma_sq0,
        psi: boot.psi0,
        rerrx: rel_x_err(&boot.x0, &reference.x),
        rerrs: rel_sigma_err(boot.sigma_sq0, reference.sigma),
        inner1: 0,
        inner2: 0,
        flops_by_format: rt.tally.by_format(),
    }];

    if boot.residual_norm0 <= CONSISTENT_RESIDUAL_TOL * accurate::norm2(&b_u) {
        return Ok(finish(
            boot.x0,
            boot.sigma_sq0,
            0,
            Termination::ConsistentSystem,
            trace,
            reference,
            rt,
        ));
    }

    let mut best_x = boot.x0;
    let mut best_sigma_sq = boot.sigma_sq0;
    let mut best_k = 0usize;
    let mut psi_prev = boot.psi0;
    let mut x = boot.x1;
    let cap = opts.force_outer.unwrap_or(opts.max_outer);
    let mut termination = Termination::MaxOuter;

    for k in 1..=cap {
        let ax = kernels::matvec(&mut rt, u, &a_u, &x);
        let r = kernels::axpy(&mut rt, u, -1.0, &ax, &b_u);
        let sigma_sq = rayleigh_quotient(&mut rt, u, &r, &x);
        let (f, g) = newton_from_residual(&mut rt, u, &a_u, &b_u, &x, sigma_sq, &r);
        let psi_k = psi_value(&mut rt, u, &f, g, &x);
        let rerrx = rel_x_err(&x, &reference.x);
        let rerrs = rel_sigma_err(sigma_sq, reference.sigma);

        if opts.force_outer.is_none() && k >= opts.psi_check_start {
            let worse = match opts.stop_rule {
                StopRule::Strict => psi_k > psi_prev,
                StopRule::Weak => psi_k >= psi_prev,
            };
            if worse {
                trace.push(TraceRow {
                    k,
                    sigma_sq,
                    psi: psi_k,
                    rerrx,
                    rerrs,
                    inner1: 0,
                    inner2: 0,
                    flops_by_format: rt.tally.by_format(),
                });
                termination = Termination::PsiIncrease { at_outer: k };
                break;
            }
        }

        let budget = match opts.inner_budget {
            InnerBudget::PerOuter => k + 1,
            InnerBudget::Fixed(l) => l,
        };
        // Inner-format boundary: scalars and right-hand sides are rounded on
        // entry (conversion, not an operation); results are already exact in
        // the working format.
        let sigma_sq_p = rt.round(up, sigma_sq);
        let rhs1: Vec<f64> = f.iter().map(|v| rt.round(up, -*v)).collect();
        let out1 = pcgtls_solve(&mut rt, up, &precond, sigma_sq_p, &rhs1, budget)?;
        if let Some(kind) = out1.breakdown {
            best_x = x.clone();
            best_sigma_sq = sigma_sq;
            best_k = k;
            trace.push(TraceRow {
                k,
                sigma_sq,
                psi: psi_k,
                rerrx,
                rerrs,
                inner1: out1.iterations,
                inner2: 0,
                flops_by_format: rt.tally.by_format(),
            });
            termination = Termination::PcgBreakdown {
                at_outer: k,
                solve: 1,
                kind,
            };
            break;
        }
        let rhs2 = kernels::round_vec(&mut rt, up, &x);
        let out2 = pcgtls_solve(&mut rt, up, &precond, sigma_sq_p, &rhs2, budget)?;
        trace.push(TraceRow {
            k,
            sigma_sq,
            psi: psi_k,
            rerrx,
            rerrs,
            inner1: out1.iterations,
            inner2: out2.iterations,
            flops_by_format: rt.tally.by_format(),
        });
        best_x = x.clone();
        best_sigma_sq = sigma_sq;
        best_k = k;
        psi_prev = psi_k;
        if let Some(kind) = out2.breakdown {
            termination = Termination::PcgBreakdown {
                at_outer: k,
                solve: 2,
                kind,
            };
            break;
        }
        let z = kernels::vec_add(&mut rt, u, &x, &out1.omega);
        let zf = kernels::dot(&mut rt, u, &z, &f);
        let zx = kernels::dot(&mut rt, u, &z, &x);
        let num = rt.round(u, zf - g);
        let den = rt.round(u, zx + 1.0);
        let beta = rt.div(u, num, den);
        x = kernels::axpy(&mut rt, u, beta, &out2.omega, &z);
    }

    Ok(finish(
        best_x,
        best_sigma_sq,
        best_k,
        termination,
        trace,
        reference,
        rt,
    ))
}

fn finish(
    x: Vec<f64>,
    sigma_sq: f64,
    outer_iterations: usize,
    termination: Termination,
    trace: Vec<TraceRow>,
    reference: &TlsSolution,
    rt: Runtime,
) -> RqiResult {
    let rerrx = rel_x_err(&x, &reference.x);
    let rerrs = rel_sigma_err(sigma_sq, reference.sigma);
    RqiResult {
        x,
        sigma_sq,
        outer_iterations,
        termination,
        trace,
        rerrx,
        rerrs,
        flops: rt.tally,
        events: rt.events,
    }
}

fn round_matrix(rt: &mut Runtime, fmt: &FpFormat, a: &Matrix) -> Matrix {
    if fmt.is_substrate() {
        return a.clone();
    }
    let mut out = a.clone();
    for v in out.data_mut() {
        *v = rt.round(fmt, *v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::tls_solve_exact;
    use rand::{Rng, SeedableRng};

    fn fp64() -> FpFormat {
        FpFormat::fp64()
    }

    #[test]
    fn psi_closed_forms() {
        let f64fmt = fp64();
        assert_eq!(psi(&f64fmt, &[0.0, 0.0], 0.0, &[5.0, 5.0]), 0.0);
        assert_eq!(psi(&f64fmt, &[0.0, 0.0, 0.0], 3.0, &[0.0, 0.0]), 3.0);
        // ‖f‖² = 25, g = 0, ‖x‖² = 24: (25/25)^½ = 1 exactly.
        assert_eq!(psi(&f64fmt, &[3.0, 4.0], 0.0, &[4.0, 2.0, 2.0]), 1.0);
    }

    #[test]
    fn newton_residual_collapses() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let b = vec![1.0, 1.0, 1.0];
        let mut rt = Runtime::new();
        // x = 0, σ² = 0: r = b, f = −Aᵀb, g = −bᵀb.
        let nr = newton_residual(&mut rt, &fp64(), &a, &b, &[0.0, 0.0], 0.0);
        assert_eq!(nr.r, b);
        assert_eq!(nr.f, vec![-9.0, -12.0]);
        assert_eq!(nr.g, -3.0);
    }

    #[test]
    fn newton_residual_zero_at_consistent_solution() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let x = [2.0, -1.0];
        let b: Vec<f64> = (0..3).map(|i| a[(i, 0)] * x[0] + a[(i, 1)] * x[1]).collect();
        let mut rt = Runtime::new();
        let nr = newton_residual(&mut rt, &fp64(), &a, &b, &x, 0.0);
        assert_eq!(nr.r, vec![0.0; 3]);
        assert_eq!(nr.f, vec![0.0, 0.0]);
        assert_eq!(nr.g, 0.0);
    }

    #[test]
    fn newton_residual_matches_substrate_in_single_precision() {
        // Benign signs: b = Ax + 0.1 keeps every accumulation cancellation-free.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(51);
        let a = Matrix::from_fn(5, 3, |_, _| rng.random::<f64>() + 0.5);
        let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 0.5).collect();
        let ax = accurate::matvec(&a, &x);
        let b: Vec<f64> = ax.iter().map(|v| v + 0.1).collect();
        let sigma_sq = 0.01;

        let mut rt = Runtime::new();
        let fmt = FpFormat::fp32();
        let nr = newton_residual(&mut rt, &fmt, &a, &b, &x, sigma_sq);

        let r_exact: Vec<f64> = b.iter().zip(&ax).map(|(bi, v)| bi - v).collect();
        let atr = accurate::matvec_t(&a, &r_exact);
        let f_exact: Vec<f64> = atr
            .iter()
            .zip(&x)
            .map(|(ai, xi)| -ai - sigma_sq * xi)
            .collect();
        let g_exact = sigma_sq - accurate::dot(&b, &r_exact);
        let tol = 10.0 * fmt.unit_roundoff();
        for i in 0..3 {
            assert!((nr.f[i] - f_exact[i]).abs() <= tol * f_exact[i].abs());
        }
        assert!((nr.g - g_exact).abs() <= tol * g_exact.abs());
    }

    #[test]
    fn bootstrap_on_identity_returns_rhs() {
        let n = 4;
        let a = Matrix::identity(n);
        let b = vec![0.5, -1.5, 2.0, 0.25];
        let mut rt = Runtime::new();
        let f = qr::householder_qr(&mut rt, &fp64(), &a).unwrap();
        let pre = Preconditioner::Triangular(f.r());
        let boot = bootstrap(&mut rt, &fp64(), &a, &b, &pre, None).unwrap();
        assert_eq!(boot.x0, b);
        assert_eq!(boot.sigma_sq0, 0.0);
        assert_eq!(boot.x1, b);
        assert_eq!(boot.psi0, 0.0);
        assert_eq!(boot.residual_norm0, 0.0);
    }

    #[test]
    fn bootstrap_rayleigh_quotient_matches_substrate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(52);
        let a = Matrix::from_fn(30, 15, |_, _| rng.random::<f64>());
        let b: Vec<f64> = (0..30).map(|_| rng.random::<f64>() + 0.5).collect();
        let mut rt = Runtime::new();
        let f = qr::householder_qr(&mut rt, &fp64(), &a).unwrap();
        let pre = Preconditioner::Triangular(f.r());
        let boot = bootstrap(&mut rt, &fp64(), &a, &b, &pre, None).unwrap();

        // Substrate reference: x_LS from the normal equations, then its
        // Rayleigh quotient.
        let x_ls = accurate::solve_dense(&accurate::gram(&a), &accurate::matvec_t(&a, &b)).unwrap();
        let r: Vec<f64> = b
            .iter()
            .zip(&accurate::matvec(&a, &x_ls))
            .map(|(bi, v)| bi - v)
            .collect();
        let rq = accurate::dot(&r, &r) / (accurate::dot(&x_ls, &x_ls) + 1.0);
        assert!(accurate::relative_error(&boot.x0, &x_ls) < 1e-12);
        assert!((boot.sigma_sq0 - rq).abs() < 1e-10 * rq);
    }

    #[test]
    fn reflector_bootstrap_agrees_with_normal_equations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        let a = Matrix::from_fn(10, 4, |_, _| rng.random::<f64>() + 0.2);
        let b: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
        let mut rt = Runtime::new();
        let f = qr::householder_qr(&mut rt, &fp64(), &a).unwrap();
        let pre = Preconditioner::Triangular(f.r());
        let via_ne = bootstrap(&mut rt, &fp64(), &a, &b, &pre, None).unwrap();
        let via_q = bootstrap(&mut rt, &fp64(), &a, &b, &pre, Some(&f)).unwrap();
        assert!(accurate::relative_error(&via_q.x0, &via_ne.x0) < 1e-12);
    }

    #[test]
    fn tau_both_paths_agree() {
        // Consistent system at its solution with ρ = 0: both τ vanish.
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let x = [1.0, 2.0];
        let b: Vec<f64> = (0..3).map(|i| a[(i, 0)] * x[0] + a[(i, 1)] * x[1]).collect();
        let tc = tau_recurrence_check(&a, &b, &x, 0.0).unwrap();
        assert!(tc.tau_recurrence.abs() < 1e-12);
        assert!(tc.tau_block.abs() < 1e-12);

        // Random instance, shift at half the smallest eigenvalue.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(54);
        let a = Matrix::from_fn(6, 3, |_, _| rng.random::<f64>() + 0.1);
        let b: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
        let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        let sv = crate::svd::singular_values(&a).unwrap();
        let lam_min = sv[2] * sv[2];
        let tc = tau_recurrence_check(&a, &b, &x, 0.5 * lam_min).unwrap();
        assert!(
            (tc.tau_recurrence - tc.tau_block).abs() <= 1e-10 * tc.tau_block.abs().max(1.0)
        );

        // Shift slightly above the smallest eigenvalue: still nonsingular.
        let tc = tau_recurrence_check(&a, &b, &x, 1.0001 * lam_min).unwrap();
        assert!(
            (tc.tau_recurrence - tc.tau_block).abs() <= 1e-8 * tc.tau_block.abs().max(1.0)
        );
    }

    #[test]
    fn consistent_system_stops_at_bootstrap() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        let a = Matrix::from_fn(12, 5, |_, _| rng.random::<f64>() + 0.5);
        let x_true: Vec<f64> = (0..5).map(|_| rng.random::<f64>() + 1.0).collect();
        let b = accurate::matvec(&a, &x_true);
        let reference = tls_solve_exact(&a, &b).unwrap();
        let res = rqi_pcgtls_mp(&a, &b, &reference, &RqiOptions::default()).unwrap();
        assert_eq!(res.termination, Termination::ConsistentSystem);
        assert_eq!(res.outer_iterations, 0);
        assert_eq!(res.trace.len(), 1);
        assert!(res.rerrx <= 1e-10, "rerrx {}", res.rerrx);
    }

    #[test]
    fn near_consistent_instance_converges_in_uniform_double() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(56);
        let a = Matrix::from_fn(20, 4, |_, _| rng.random::<f64>());
        let x_true: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 0.5).collect();
        let b: Vec<f64> = accurate::matvec(&a, &x_true)
            .iter()
            .map(|v| v + 1e-6 * (rng.random::<f64>() - 0.5))
            .collect();
        let reference = tls_solve_exact(&a, &b).unwrap();
        let res = rqi_pcgtls_mp(&a, &b, &reference, &RqiOptions::default()).unwrap();
        assert!(res.rerrx <= 1e-8, "rerrx {}", res.rerrx);
        assert!(res.trace.len() >= 2);
        // Cumulative per-format tallies never decrease along the trace.
        for w in res.trace.windows(2) {
            let prev: u64 = w[0].flops_by_format.values().sum();
            let next: u64 = w[1].flops_by_format.values().sum();
            assert!(next >= prev);
        }
    }

    #[test]
    fn forced_run_has_exact_per_iteration_cost() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(57);
        let (m, n) = (12usize, 5usize);
        let a = Matrix::from_fn(m, n, |_, _| rng.random::<f64>() + 0.25);
        let b: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.5).collect();
        let reference = tls_solve_exact(&a, &b).unwrap();

        let run = |outer: usize| {
            let opts = RqiOptions {
                force_outer: Some(outer),
                ..RqiOptions::default()
            };
            rqi_pcgtls_mp(&a, &b, &reference, &opts).unwrap()
        };
        let r2 = run(2);
        let r3 = run(3);
        // Iteration k = 3 must have used its full inner budgets.
        let last = r3.trace.last().unwrap();
        assert_eq!(last.inner1, 4);
        assert_eq!(last.inner2, 4);
        let (m64, n64) = (m as u64, n as u64);
        let outer_glue = 4 * m64 * n64 + 5 * m64 + 11 * n64 - 5;
        let solve_setup = 2 * (n64 * n64 + 2 * n64 - 1);
        let solve_steps = 2 * 4 * (2 * n64 * n64 + 14 * n64 - 3);
        assert_eq!(
            r3.flops.total() - r2.flops.total(),
            outer_glue + solve_setup + solve_steps
        );
    }

    #[test]
    fn precision_config_ordering_is_enforced() {
        assert!(PrecisionConfig::new(FpFormat::fp64(), FpFormat::fp32(), FpFormat::fp16()).is_ok());
        assert!(PrecisionConfig::new(FpFormat::fp64(), FpFormat::fp16(), FpFormat::fp16()).is_ok());
        assert!(
            PrecisionConfig::new(FpFormat::fp32(), FpFormat::fp64(), FpFormat::fp16()).is_err()
        );
    }
}

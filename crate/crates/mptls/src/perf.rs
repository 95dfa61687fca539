//! Closed-form operation-count model for a run with r outer iterations, and
//! the modeled uniform-versus-mixed-precision speedup over (m, n) grids.
//!
//! The three polynomial terms count the working-precision outer iteration,
//! the inner-precision conjugate-gradient work (two solves per outer step
//! with budget k+1), and the one-time factorization. Integer arithmetic is
//! exact (u128), so the model can be compared to a solver's recorded tally
//! without rounding slack.

use serde::Serialize;

/// Per-precision relative cost multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostConstants {
    /// Working-precision multiplier.
    pub c: f64,
    /// Inner-solve multiplier.
    pub c_p: f64,
    /// Factorization multiplier.
    pub c_q: f64,
}

impl CostConstants {
    /// Double/single/half defaults.
    pub fn mixed_default() -> CostConstants {
        CostConstants {
            c: 1.0,
            c_p: 0.5,
            c_q: 0.25,
        }
    }

    /// Everything at working cost.
    pub fn uniform() -> CostConstants {
        CostConstants {
            c: 1.0,
            c_p: 1.0,
            c_q: 1.0,
        }
    }
}

impl Default for CostConstants {
    fn default() -> Self {
        CostConstants::mixed_default()
    }
}

/// Weighted model evaluation plus the exact unweighted counts per term.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CostResult {
    pub total: f64,
    pub term_working: f64,
    pub term_inner: f64,
    pub term_factorization: f64,
    pub ops_working: u128,
    pub ops_inner: u128,
    pub ops_factorization: u128,
}

/// Working-precision operations: bootstrap (without the least-squares start,
/// see [`bootstrap_ls_adjustment`]) plus r outer steps.
pub fn ops_working(m: u64, n: u64, r: u64) -> u128 {
    let (m, n, r) = (m as u128, n as u128, r as u128);
    let bootstrap = 2 * m * n + 3 * m + 4 * n + 2 * n * n - 2;
    let per_outer = 4 * m * n + 5 * m + 11 * n - 5;
    bootstrap + r * per_outer
}

/// Inner-precision operations: two solves per outer step k with budget k+1.
/// Setup costs n²+2n−1 each; every step costs 2n²+14n−3.
pub fn ops_inner(n: u64, r: u64) -> u128 {
    let (n, r) = (n as u128, r as u128);
    let setup = 2 * r * (n * n + 2 * n - 1);
    // Σ_{k=1..r} 2(k+1) = r² + 3r steps in total across both solves.
    let steps = (r * r + 3 * r) * (2 * n * n + 14 * n - 3);
    setup + steps
}

/// Factorization operations: 2mn² − (2/3)n³ as the exact integer (6mn²−2n³)/3.
pub fn ops_factorization(m: u64, n: u64) -> u128 {
    let (m, n) = (m as u128, n as u128);
    (6 * m * n * n - 2 * n * n * n) / 3
}

/// Total unweighted operations of the model.
pub fn total_ops(m: u64, n: u64, r: u64) -> u128 {
    ops_working(m, n, r) + ops_inner(n, r) + ops_factorization(m, n)
}

/// Operations the solver performs beyond the model: the least-squares start
/// is solved through the stored triangle (one transposed product and two
/// substitutions), which the closed form does not include.
pub fn bootstrap_ls_adjustment(m: u64, n: u64) -> u128 {
    let (m, n) = (m as u128, n as u128);
    2 * m * n - n + 2 * n * n
}

/// Evaluates the weighted model.
pub fn cost(m: u64, n: u64, r: u64, consts: &CostConstants) -> CostResult {
    let ops_w = ops_working(m, n, r);
    let ops_i = ops_inner(n, r);
    let ops_f = ops_factorization(m, n);
    let term_working = consts.c * ops_w as f64;
    let term_inner = consts.c_p * ops_i as f64;
    let term_factorization = consts.c_q * ops_f as f64;
    CostResult {
        total: term_working + term_inner + term_factorization,
        term_working,
        term_inner,
        term_factorization,
        ops_working: ops_w,
        ops_inner: ops_i,
        ops_factorization: ops_f,
    }
}

/// cost(uniform) / cost(mixed): > 1 when mixed precision is cheaper.
pub fn speedup(m: u64, n: u64, r: u64, mixed: &CostConstants, uniform: &CostConstants) -> f64 {
    cost(m, n, r, uniform).total / cost(m, n, r, mixed).total
}

/// One grid cell; `speedup` is None for masked cells (n > m).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpeedupCell {
    pub m: u64,
    pub n: u64,
    pub r: u64,
    pub speedup: Option<f64>,
}

/// Evaluates the speedup over the product of the two size lists.
pub fn speedup_grid(
    ms: &[u64],
    ns: &[u64],
    r: u64,
    mixed: &CostConstants,
    uniform: &CostConstants,
) -> Vec<SpeedupCell> {
    let mut out = Vec::with_capacity(ms.len() * ns.len());
    for &m in ms {
        for &n in ns {
            let speedup = if n > m {
                None
            } else {
                Some(speedup(m, n, r, mixed, uniform))
            };
            out.push(SpeedupCell { m, n, r, speedup });
        }
    }
    out
}

/// `count` log-spaced integer sizes from `lo` to `hi` inclusive.
pub fn logspace_sizes(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    assert!(lo >= 1 && hi >= lo && count >= 2);
    let (l0, l1) = ((lo as f64).log10(), (hi as f64).log10());
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            10f64.powf(l0 + t * (l1 - l0)).round() as u64
        })
        .collect()
}

/// The canonical 20-point grid axis from 1 to 10⁶.
pub fn default_grid_axis() -> Vec<u64> {
    logspace_sizes(1, 1_000_000, 20)
}

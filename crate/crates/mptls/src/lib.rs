//! Mixed-precision total least squares via Rayleigh quotient iteration.
//!
//! The library simulates reduced floating-point formats on an f64 substrate
//! (rounding after every elementary operation), provides the dense kernels,
//! QR/Cholesky factorizations, and one-sided Jacobi SVD built on top of that
//! layer, and uses them for:
//!
//! - an exact SVD-based total least squares oracle ([`oracle`]);
//! - the iterative solver: Rayleigh quotient iteration with a preconditioned
//!   conjugate-gradient inner solve, each stage in a configurable precision
//!   ([`rqi`], [`pcg`]);
//! - a-priori bounds on how coarse the factorization precision may be
//!   ([`constraints`]);
//! - reproducible problem generators ([`problems`]);
//! - a closed-form operation-count model with its predicted mixed-precision
//!   speedup ([`perf`]).
//!
//! Every simulated operation is tallied per kernel and per format
//! ([`flops`]), and rounding events (overflow, underflow, division by zero)
//! are counted ([`precision::EventCounters`]).

pub mod accurate;
pub mod cholesky;
pub mod constraints;
pub mod error;
pub mod flops;
pub mod io;
pub mod kernels;
pub mod matrix;
pub mod oracle;
pub mod pcg;
pub mod perf;
pub mod precision;
pub mod problems;
pub mod qr;
pub mod rqi;
pub mod svd;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use precision::{EventCounters, FpFormat};

pub use cholesky::{cholesky_scaled, cholesky_unscaled, CholeskyFactors};
pub use constraints::{
    evaluate_uq_constraints, preconditioner_eigen_interval, EigenInterval, FormatAssessment,
    PrecisionConstraintReport,
};
pub use flops::{FlopCounter, Kernel};
pub use kernels::Runtime;
pub use oracle::{tls_solve_exact, TlsSolution};
pub use pcg::{pcgtls_solve, PcgBreakdown, PcgOutcome, Preconditioner};
pub use perf::{cost, speedup, speedup_grid, CostConstants, CostResult};
pub use problems::TlsProblem;
pub use qr::{householder_qr, QrFactors};
pub use rqi::{
    rqi_pcgtls_mp, InnerBudget, PrecisionConfig, PreconditionerKind, RqiOptions, RqiResult,
    StopRule, Termination, TraceRow,
};
pub use svd::{svd, SvdResult};

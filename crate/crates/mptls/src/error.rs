//! Error type shared across the library.

use thiserror::Error;

/// Errors surfaced by factorizations, solvers, generators, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A floating-point format description violated the constructor limits.
    #[error("invalid floating-point format: {0}")]
    InvalidFormat(String),

    /// Operand shapes do not conform.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A triangular factor acquired a zero (or non-finite) diagonal entry.
    #[error("rank-deficient matrix: {0}")]
    RankDeficient(String),

    /// Cholesky hit a nonpositive or non-finite pivot.
    #[error("Cholesky breakdown at pivot {index}: pivot value {pivot}")]
    CholeskyBreakdown { index: usize, pivot: f64 },

    /// The TLS problem has no unique solution (singular value gap too small).
    #[error("TLS solution is not unique: gap (sigma'_n - sigma_n+1)/sigma'_1 = {relative_gap:.3e}")]
    NonUniqueTls { relative_gap: f64 },

    /// A generator or solver was invoked with out-of-range parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Jacobi SVD failed to reach the off-diagonal tolerance within the sweep cap.
    #[error("SVD did not converge within {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    SvdNoConvergence { sweeps: usize, residual: f64 },

    /// File parsing / serialization problems.
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

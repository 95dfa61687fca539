//! Operation tallies keyed by kernel kind and floating-point format.
//!
//! Charges follow the analytical cost model's per-kernel totals so that an
//! instrumented solver run can be compared against the closed-form count
//! exactly (see [`crate::perf`]). Scalar glue operations the model omits
//! (single adds/divides between kernel calls) are deliberately uncharged.

use serde::Serialize;
use std::collections::BTreeMap;

/// Kernel kinds that charge operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Kernel {
    MatVec,
    MatVecT,
    Dot,
    Axpy,
    VecAdd,
    VecNegate,
    Norm2,
    TriSolve,
    Qr,
    Gram,
    DiagScale,
    Cholesky,
    ApplyQ,
}

impl Kernel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kernel::MatVec => "matvec",
            Kernel::MatVecT => "matvec_t",
            Kernel::Dot => "dot",
            Kernel::Axpy => "axpy",
            Kernel::VecAdd => "vec_add",
            Kernel::VecNegate => "vec_negate",
            Kernel::Norm2 => "norm2",
            Kernel::TriSolve => "tri_solve",
            Kernel::Qr => "qr",
            Kernel::Gram => "gram",
            Kernel::DiagScale => "diag_scale",
            Kernel::Cholesky => "cholesky",
            Kernel::ApplyQ => "apply_q",
        }
    }
}

/// Closed-form operation charges per kernel.
pub mod charges {
    /// y = Ax on m×n: 2mn − m.
    pub fn matvec(m: usize, n: usize) -> u64 {
        (2 * m * n - m) as u64
    }
    /// y = Aᵀx on m×n: 2mn − n.
    pub fn matvec_t(m: usize, n: usize) -> u64 {
        (2 * m * n - n) as u64
    }
    /// Inner product of length n: 2n − 1.
    pub fn dot(n: usize) -> u64 {
        (2 * n - 1) as u64
    }
    /// y + λx of length n: 2n.
    pub fn axpy(n: usize) -> u64 {
        (2 * n) as u64
    }
    /// Elementwise add/negate of length n: n.
    pub fn vec_elementwise(n: usize) -> u64 {
        n as u64
    }
    /// Euclidean norm of length n: dot plus one square root.
    pub fn norm2(n: usize) -> u64 {
        (2 * n) as u64
    }
    /// Forward or backward substitution with an n×n triangle: n².
    pub fn tri_solve(n: usize) -> u64 {
        (n * n) as u64
    }
    /// Householder QR of m×n: 2mn² − (2/3)n³, as the integer (6mn² − 2n³)/3.
    pub fn qr(m: usize, n: usize) -> u64 {
        ((6 * m * n * n - 2 * n * n * n) / 3) as u64
    }
    /// Symmetric Gram formation AᵀA (upper half) from m×n: n(n+1)/2 dots of length m.
    pub fn gram(m: usize, n: usize) -> u64 {
        (n * (n + 1) / 2) as u64 * dot(m)
    }
    /// Dot-product-form Cholesky of an n×n matrix.
    pub fn cholesky(n: usize) -> u64 {
        (n * (n + 1) * (2 * n + 1) / 6) as u64
    }
    /// One elementwise diagonal scaling pass of length n.
    pub fn diag_scale(n: usize) -> u64 {
        n as u64
    }
}

/// Tallies keyed by (kernel, format name).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlopCounter {
    counts: BTreeMap<(Kernel, String), u64>,
}

impl FlopCounter {
    pub fn new() -> FlopCounter {
        FlopCounter::default()
    }

    pub fn charge(&mut self, kernel: Kernel, format_name: &str, ops: u64) {
        if ops == 0 {
            return;
        }
        *self
            .counts
            .entry((kernel, format_name.to_string()))
            .or_insert(0) += ops;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn total_for_format(&self, format_name: &str) -> u64 {
        self.counts
            .iter()
            .filter(|((_, f), _)| f == format_name)
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn by_format(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for ((_, f), v) in &self.counts {
            *out.entry(f.clone()).or_insert(0) += v;
        }
        out
    }

    pub fn by_kernel(&self) -> BTreeMap<&'static str, u64> {
        let mut out = BTreeMap::new();
        for ((k, _), v) in &self.counts {
            *out.entry(k.as_str()).or_insert(0) += v;
        }
        out
    }

    pub fn get(&self, kernel: Kernel, format_name: &str) -> u64 {
        self.counts
            .get(&(kernel, format_name.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

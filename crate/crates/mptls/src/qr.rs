//! Householder QR with per-operation rounding in a target format.
//!
//! Reflectors are stored in factored form: the packed matrix carries R in its
//! upper triangle and the normalized reflector tails (implicit leading 1)
//! below the diagonal. The diagonal of R is kept nonnegative, so factoring a
//! standard Gaussian matrix and taking Q yields a Haar-distributed orthogonal
//! matrix.

use crate::error::{Error, Result};
use crate::flops::{charges, Kernel};
use crate::kernels::Runtime;
use crate::matrix::Matrix;
use crate::precision::FpFormat;

/// Packed Householder factorization of an m×n matrix, m ≥ n.
#[derive(Debug, Clone)]
pub struct QrFactors {
    packed: Matrix,
    betas: Vec<f64>,
}

/// Factors `a` as QR, with every elementary operation rounded into `fmt`.
/// The input is first stored in `fmt` (a conversion, not a flop). Fails if
/// the resulting R has an exactly-zero or non-finite diagonal entry.
pub fn householder_qr(rt: &mut Runtime, fmt: &FpFormat, a: &Matrix) -> Result<QrFactors> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::InvalidParameter(format!(
            "qr requires rows >= cols, got {m}x{n}"
        )));
    }
    rt.tally.charge(Kernel::Qr, &fmt.name, charges::qr(m, n));
    let mut w = if fmt.is_substrate() {
        a.clone()
    } else {
        let mut w = a.clone();
        for v in w.data_mut() {
            *v = rt.round(fmt, *v);
        }
        w
    };
    let mut betas = vec![0.0; n];
    for k in 0..n {
        let mut sigma = 0.0;
        for i in k + 1..m {
            let sq = rt.round(fmt, w[(i, k)] * w[(i, k)]);
            sigma = rt.round(fmt, sigma + sq);
        }
        let x0 = w[(k, k)];
        if sigma == 0.0 && x0 >= 0.0 {
            continue;
        }
        let x0sq = rt.round(fmt, x0 * x0);
        let sum = rt.round(fmt, x0sq + sigma);
        let mu = rt.round(fmt, sum.sqrt());
        // Cancellation-safe leading reflector entry.
        let v0 = if x0 <= 0.0 {
            rt.round(fmt, x0 - mu)
        } else {
            let denom = rt.round(fmt, x0 + mu);
            rt.div(fmt, -sigma, denom)
        };
        if v0 == 0.0 || !v0.is_finite() {
            continue;
        }
        let v0sq = rt.round(fmt, v0 * v0);
        let num = rt.round(fmt, 2.0 * v0sq);
        let den = rt.round(fmt, sigma + v0sq);
        betas[k] = rt.div(fmt, num, den);
        for i in k + 1..m {
            let q = w[(i, k)] / v0;
            w[(i, k)] = rt.round(fmt, q);
        }
        w[(k, k)] = mu;
        for j in k + 1..n {
            let mut s = w[(k, j)];
            for i in k + 1..m {
                let p = rt.round(fmt, w[(i, k)] * w[(i, j)]);
                s = rt.round(fmt, s + p);
            }
            let bw = rt.round(fmt, betas[k] * s);
            w[(k, j)] = rt.round(fmt, w[(k, j)] - bw);
            for i in k + 1..m {
                let p = rt.round(fmt, bw * w[(i, k)]);
                w[(i, j)] = rt.round(fmt, w[(i, j)] - p);
            }
        }
    }
    for k in 0..n {
        let d = w[(k, k)];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::RankDeficient(format!(
                "triangular factor has unusable diagonal entry {d} at position {k}"
            )));
        }
    }
    Ok(QrFactors { packed: w, betas })
}

impl QrFactors {
    pub fn rows(&self) -> usize {
        self.packed.rows()
    }

    pub fn cols(&self) -> usize {
        self.packed.cols()
    }

    /// The n×n upper-triangular factor.
    pub fn r(&self) -> Matrix {
        let n = self.cols();
        Matrix::from_fn(n, n, |i, j| if i <= j { self.packed[(i, j)] } else { 0.0 })
    }

    /// Qᵀy in the substrate (reflectors applied first-to-last).
    pub fn apply_qt(&self, y: &[f64]) -> Vec<f64> {
        let (m, n) = (self.rows(), self.cols());
        debug_assert_eq!(y.len(), m);
        let mut v = y.to_vec();
        for k in 0..n {
            self.reflect(&mut v, k);
        }
        v
    }

    /// Qy in the substrate (reflectors applied last-to-first).
    pub fn apply_q(&self, y: &[f64]) -> Vec<f64> {
        let (m, n) = (self.rows(), self.cols());
        debug_assert_eq!(y.len(), m);
        let mut v = y.to_vec();
        for k in (0..n).rev() {
            self.reflect(&mut v, k);
        }
        v
    }

    /// The m×n matrix of the first n columns of Q.
    pub fn thin_q(&self) -> Matrix {
        let (m, n) = (self.rows(), self.cols());
        let mut q = Matrix::zeros(m, n);
        for j in 0..n {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            let col = self.apply_q(&e);
            for i in 0..m {
                q[(i, j)] = col[i];
            }
        }
        q
    }

    /// Applies the (symmetric, involutory) k-th reflector in place.
    fn reflect(&self, v: &mut [f64], k: usize) {
        let m = self.rows();
        let beta = self.betas[k];
        if beta == 0.0 {
            return;
        }
        let mut w = v[k];
        for i in k + 1..m {
            w += self.packed[(i, k)] * v[i];
        }
        w *= beta;
        v[k] -= w;
        for i in k + 1..m {
            v[i] -= w * self.packed[(i, k)];
        }
    }
}

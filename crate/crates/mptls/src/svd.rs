//! One-sided Jacobi singular value decomposition in the f64 substrate.
//!
//! Column rotations are applied until all column pairs are numerically
//! orthogonal; singular values are the final column norms. All inner products
//! use compensated summation, which keeps the factorization accurate enough to
//! serve as the reference decomposition for the exact solvers.

use crate::accurate;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Thin SVD A = U Σ Vᵀ with U m×n, Σ = diag(s), V n×n, s sorted descending.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

const OFF_DIAG_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 60;

/// One-sided Jacobi SVD. Requires rows ≥ cols.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::InvalidParameter(format!(
            "svd requires rows >= cols, got {m}x{n}"
        )));
    }
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    let mut last_off = 0.0_f64;

    let mut converged = n < 2;
    let mut sweeps_used = 0;
    for sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        let mut max_off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                let app = accurate::dot(w.col(p), w.col(p));
                let aqq = accurate::dot(w.col(q), w.col(q));
                let apq = accurate::dot(w.col(p), w.col(q));
                if app == 0.0 || aqq == 0.0 {
                    continue;
                }
                let scale = (app * aqq).sqrt();
                let off = apq.abs() / scale;
                max_off = max_off.max(off);
                if apq.abs() <= OFF_DIAG_TOL * scale {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut w, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
            }
        }
        last_off = max_off;
        sweeps_used = sweep + 1;
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            sweeps: sweeps_used,
            residual: last_off,
        });
    }

    // Column norms are the singular values; sort descending, carrying V.
    let mut order: Vec<usize> = (0..n).collect();
    let sigma: Vec<f64> = (0..n).map(|j| accurate::norm2(w.col(j))).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());

    let mut u = Matrix::zeros(m, n);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut s_sorted = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sj = sigma[src];
        s_sorted.push(sj);
        if sj > 0.0 {
            let col = w.col(src);
            for i in 0..m {
                u[(i, dst)] = col[i] / sj;
            }
        }
        let vcol = v.col(src);
        for i in 0..n {
            v_sorted[(i, dst)] = vcol[i];
        }
    }
    Ok(SvdResult {
        u,
        s: s_sorted,
        v: v_sorted,
    })
}

/// Singular values only, descending.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    Ok(svd(a)?.s)
}

fn rotate_cols(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let wp = m[(i, p)];
        let wq = m[(i, q)];
        m[(i, p)] = c * wp - s * wq;
        m[(i, q)] = s * wp + c * wq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruction_error(a: &Matrix, f: &SvdResult) -> f64 {
        let (m, n) = (a.rows(), a.cols());
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += f.u[(i, k)] * f.s[k] * f.v[(j, k)];
                }
                worst = worst.max((s - a[(i, j)]).abs());
            }
        }
        worst
    }

    fn orthonormality_error(q: &Matrix) -> f64 {
        let n = q.cols();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let d = crate::accurate::dot(q.col(i), q.col(j));
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - want).abs());
            }
        }
        worst
    }

    #[test]
    fn identity_and_diagonal() {
        let f = svd(&Matrix::identity(4)).unwrap();
        for &s in &f.s {
            assert!((s - 1.0).abs() < 1e-15);
        }
        let d = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let f = svd(&d).unwrap();
        assert!((f.s[0] - 3.0).abs() < 1e-14);
        assert!((f.s[1] - 2.0).abs() < 1e-14);
        assert!((f.s[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_by_two_closed_form() {
        // Squared singular values of [[2,1],[0,1]] are 3 ± √5.
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let f = svd(&a).unwrap();
        let s5 = 5.0_f64.sqrt();
        assert!((f.s[0] - (3.0 + s5).sqrt()).abs() < 1e-14);
        assert!((f.s[1] - (3.0 - s5).sqrt()).abs() < 1e-14);
        assert!(reconstruction_error(&a, &f) < 1e-14);
        assert!(orthonormality_error(&f.u) < 1e-14);
        assert!(orthonormality_error(&f.v) < 1e-14);
    }

    #[test]
    fn rank_deficient_matrix() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let f = svd(&a).unwrap();
        assert!((f.s[0] - 2.0).abs() < 1e-14);
        assert!(f.s[1].abs() < 1e-14);
        // Null-space direction is (1, −1)/√2 up to sign.
        let ratio = f.v[(0, 1)] / f.v[(1, 1)];
        assert!((ratio + 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction_and_orthogonality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let a = Matrix::from_fn(12, 7, |_, _| rng.random::<f64>() - 0.5);
        let f = svd(&a).unwrap();
        assert!(reconstruction_error(&a, &f) < 1e-13);
        assert!(orthonormality_error(&f.u) < 1e-13);
        assert!(orthonormality_error(&f.v) < 1e-13);
        for k in 1..f.s.len() {
            assert!(f.s[k - 1] >= f.s[k]);
        }
    }

    #[test]
    fn wide_input_rejected() {
        let a = Matrix::zeros(2, 5);
        assert!(svd(&a).is_err());
    }
}

//! High-accuracy substrate helpers: compensated sums and inner products,
//! Gram-matrix formation, and a small dense solver. These run entirely in the
//! native f64 substrate and are used for references, diagnostics, and
//! factorization set-up — they are never charged to the simulated flop tally.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Neumaier-compensated sum.
pub fn sum(xs: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Neumaier-compensated inner product.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut s = 0.0;
    let mut c = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let p = xi * yi;
        let t = s + p;
        if s.abs() >= p.abs() {
            c += (s - t) + p;
        } else {
            c += (p - t) + s;
        }
        s = t;
    }
    s + c
}

/// Euclidean norm via the compensated inner product.
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Aᵀ A with compensated column inner products (symmetric by construction).
pub fn gram(a: &Matrix) -> Matrix {
    let n = a.cols();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dot(a.col(i), a.col(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Aᵀ x in the substrate with compensated dots.
pub fn matvec_t(a: &Matrix, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.rows(), x.len());
    (0..a.cols()).map(|j| dot(a.col(j), x)).collect()
}

/// A x in the substrate with compensated dots over rows.
pub fn matvec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.cols(), x.len());
    (0..a.rows())
        .map(|i| dot(&a.row_vec(i), x))
        .collect()
}

/// Dense solve of a square system by Gaussian elimination with partial
/// pivoting. Small systems only (reference computations and diagnostics).
pub fn solve_dense(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_dense: {}x{} with rhs length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if m[(i, k)].abs() > m[(piv, k)].abs() {
                piv = i;
            }
        }
        if m[(piv, k)] == 0.0 {
            return Err(Error::RankDeficient(format!(
                "singular matrix in dense solve at column {k}"
            )));
        }
        if piv != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = t;
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Ok(x)
}

/// Relative Euclidean error ‖x − x_ref‖ / ‖x_ref‖ (absolute if x_ref = 0).
pub fn relative_error(x: &[f64], x_ref: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), x_ref.len());
    let diff: Vec<f64> = x.iter().zip(x_ref).map(|(a, b)| a - b).collect();
    let denom = norm2(x_ref);
    if denom == 0.0 {
        norm2(&diff)
    } else {
        norm2(&diff) / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        // Naive summation loses the small term entirely.
        assert_eq!(sum(&[1e100, 1.0, -1e100]), 1.0);
        assert_eq!(sum(&[]), 0.0);
        assert_eq!(sum(&[2.5]), 2.5);
    }

    #[test]
    fn dot_and_norm_hand_values() {
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 32.0);
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        assert_eq!(norm2(&[]), 0.0);
    }

    #[test]
    fn gram_of_orthonormal_columns_is_identity() {
        let q = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let g = gram(&q);
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], 1.0);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn dense_solver_on_known_system() {
        // [[2,1],[1,3]] x = [3,5] has solution [4/5, 7/5].
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = solve_dense(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);

        let sing = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(solve_dense(&sing, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn relative_error_conventions() {
        assert_eq!(relative_error(&[2.0], &[1.0]), 1.0);
        assert_eq!(relative_error(&[1.0, 0.0], &[0.0, 0.0]), 1.0);
        assert_eq!(relative_error(&[5.0, 5.0], &[5.0, 5.0]), 0.0);
    }
}

//! Shared helpers for the integration suites: an independent brute-force
//! symmetric eigensolver used to cross-check the SVD-based solution path.

use mptls::Matrix;

/// Two-sided cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns eigenvalues in ascending order with matching eigenvector columns.
/// Deliberately independent of the library's one-sided SVD: rotations act on
/// the symmetric matrix itself.
pub fn symmetric_eigen(mut m: Matrix) -> (Vec<f64>, Matrix) {
    let n = m.rows();
    assert_eq!(n, m.cols(), "eigensolver needs a square matrix");
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..200 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-16 * scale {
                    continue;
                }
                rotated = true;
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Brute-force total least squares: eigendecompose [A b]ᵀ[A b], take the
/// eigenvector of the smallest eigenvalue, and read off the solution from its
/// last component. Returns (x, smallest singular value of [A b]).
pub fn brute_force_tls(a: &Matrix, b: &[f64]) -> (Vec<f64>, f64) {
    let n = a.cols();
    let aug = a.hcat_vec(b).expect("dimensions agree");
    let gram = mptls::accurate::gram(&aug);
    let (values, vectors) = symmetric_eigen(gram);
    let last = vectors[(n, 0)];
    assert!(
        last != 0.0,
        "degenerate instance: eigenvector has zero last component"
    );
    let x: Vec<f64> = (0..n).map(|i| -vectors[(i, 0)] / last).collect();
    (x, values[0].max(0.0).sqrt())
}

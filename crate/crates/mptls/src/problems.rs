//! Seeded generators for the five benchmark problem families. Each generator
//! documents its random draw order so instances are reproducible bit-for-bit
//! from (generator, parameters, seed).

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// One generated instance: the perturbed data, the pre-perturbation solution
/// when the construction has one, and enough metadata to regenerate it.
#[derive(Debug, Clone)]
pub struct TlsProblem {
    pub a: Matrix,
    pub b: Vec<f64>,
    /// Solution of the unperturbed system, when the construction defines one.
    pub x_true: Option<Vec<f64>>,
    pub label: String,
    pub seed: u64,
    pub epsilon: f64,
    /// Generator-specific parameters for echoing into summaries.
    pub params: BTreeMap<String, f64>,
}

/// Deterministic stream for a seed; every generator draws from one of these.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller (two uniform draws per sample).
fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // in (0, 1]
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Uniform(0,1) matrix drawn row-major (row index outer, column inner).
fn uniform_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    let mut a = Matrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = rng.random::<f64>();
        }
    }
    a
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Haar-distributed orthogonal matrix: Householder factorization of a
/// standard-Gaussian matrix. The factorization keeps the triangle's diagonal
/// nonnegative, which is exactly the sign correction Haar sampling needs.
/// Draw order: n² normals, row-major.
pub fn rand_orth(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = std_normal(rng);
        }
    }
    let mut rt = crate::kernels::Runtime::new();
    let f = crate::qr::householder_qr(&mut rt, &crate::precision::FpFormat::fp64(), &g)
        .expect("Gaussian matrix is almost surely full rank");
    f.thin_q()
}

/// Dense uniform instance: A = U(0,1) + ε·U(0,1), b = 1 + ε·U(0,1).
/// Draw order: base A (m·n), perturbation of A (m·n), perturbation of b (m).
pub fn gen_random(m: usize, n: usize, epsilon: f64, seed: u64) -> Result<TlsProblem> {
    if n < 1 || m < n {
        return Err(Error::InvalidParameter(format!(
            "need m >= n >= 1, got {m}x{n}"
        )));
    }
    let mut rng = rng_for(seed);
    let base = uniform_matrix(&mut rng, m, n);
    let noise = uniform_matrix(&mut rng, m, n);
    let a = Matrix::from_fn(m, n, |i, j| base[(i, j)] + epsilon * noise[(i, j)]);
    let b: Vec<f64> = uniform_vec(&mut rng, m)
        .into_iter()
        .map(|v| 1.0 + epsilon * v)
        .collect();
    Ok(TlsProblem {
        a,
        b,
        x_true: None,
        label: "random".into(),
        seed,
        epsilon,
        params: BTreeMap::from([("m".into(), m as f64), ("n".into(), n as f64)]),
    })
}

/// The fixed 9×4 sparse pattern with two δ-sized and two unit columns,
/// perturbed multiplicatively: A = A₀∘(1 + εĒ), b = b₀∘(1 + εē) with
/// Ē, ē uniform(−1,1). Draw order: Ē (9·4, row-major), ē (9).
pub fn gen_delta(delta: f64, epsilon: f64, seed: u64) -> Result<TlsProblem> {
    if delta <= 0.0 {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let mut a0 = Matrix::zeros(9, 4);
    a0[(0, 0)] = delta;
    a0[(2, 1)] = delta;
    a0[(6, 2)] = 1.0;
    a0[(8, 3)] = 1.0;
    let b0 = vec![1.0; 9];
    let mut rng = rng_for(seed);
    let mut a = Matrix::zeros(9, 4);
    for i in 0..9 {
        for j in 0..4 {
            let ebar = 2.0 * rng.random::<f64>() - 1.0;
            a[(i, j)] = a0[(i, j)] * (1.0 + epsilon * ebar);
        }
    }
    let b: Vec<f64> = b0
        .iter()
        .map(|v| {
            let fbar = 2.0 * rng.random::<f64>() - 1.0;
            v * (1.0 + epsilon * fbar)
        })
        .collect();
    Ok(TlsProblem {
        a,
        b,
        x_true: None,
        label: "delta".into(),
        seed,
        epsilon,
        params: BTreeMap::from([("delta".into(), delta)]),
    })
}

/// Graded-spectrum instance: A₀ = Y·[D;0]·Zᵀ with Haar-orthogonal Y, Z and
/// D = diag(1, 2⁻¹, …, 2^{1−n}); x_true = (1, 1/2, …, 1/n); b₀ = A₀·x_true;
/// additive ε·U(0,1) perturbations on both A and b.
/// Draw order: Y (m² normals), Z (n² normals), E (m·n uniforms), e (m).
pub fn gen_bjorck(m: usize, n: usize, epsilon: f64, seed: u64) -> Result<TlsProblem> {
    if n < 1 || m < n {
        return Err(Error::InvalidParameter(format!(
            "need m >= n >= 1, got {m}x{n}"
        )));
    }
    let mut rng = rng_for(seed);
    let y = rand_orth(m, &mut rng);
    let z = rand_orth(n, &mut rng);
    // A0 = Y[:, :n] · D · Zᵀ, folding D into the columns of Y.
    let mut a0 = Matrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += y[(i, k)] * (2.0f64).powi(-(k as i32)) * z[(j, k)];
            }
            a0[(i, j)] = s;
        }
    }
    let x_true: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
    let b0 = crate::accurate::matvec(&a0, &x_true);
    let noise = uniform_matrix(&mut rng, m, n);
    let a = Matrix::from_fn(m, n, |i, j| a0[(i, j)] + epsilon * noise[(i, j)]);
    let b: Vec<f64> = b0
        .iter()
        .zip(uniform_vec(&mut rng, m))
        .map(|(v, e)| v + epsilon * e)
        .collect();
    Ok(TlsProblem {
        a,
        b,
        x_true: Some(x_true),
        label: "bjorck".into(),
        seed,
        epsilon,
        params: BTreeMap::from([
            ("m".into(), m as f64),
            ("n".into(), n as f64),
            // Y and Z are orthonormal, so the unperturbed matrix has condition
            // number exactly 2^(n-1) from the geometric singular value ladder.
            ("condition_unperturbed".into(), (2.0f64).powi(n as i32 - 1)),
        ]),
    })
}

/// Banded lower-triangular Toeplitz operator from a sampled Gaussian pulse,
/// with a full-Toeplitz perturbation: A is n×(n−2ω); the first column holds
/// exp(−(ω−i+1)²/(2α²))/√(2πα²) for i = 1..2ω+1. The perturbation reuses one
/// draw sequence down the first column and one along the first row (matching
/// corner entries). Draw order: column draws (n), row draws (n−2ω), b noise (n).
pub fn gen_toeplitz(
    n: usize,
    omega: usize,
    alpha: f64,
    scale: f64,
    seed: u64,
) -> Result<TlsProblem> {
    if n <= 2 * omega {
        return Err(Error::InvalidParameter(format!(
            "need n > 2*omega, got n={n}, omega={omega}"
        )));
    }
    if alpha <= 0.0 {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let w = n - 2 * omega;
    let mut col = vec![0.0; n];
    let norm = 1.0 / (2.0 * PI * alpha * alpha).sqrt();
    for i in 1..=(2 * omega + 1) {
        let d = omega as f64 - i as f64 + 1.0;
        col[i - 1] = norm * (-d * d / (2.0 * alpha * alpha)).exp();
    }
    let t = Matrix::from_fn(n, w, |i, j| if i >= j { col[i - j] } else { 0.0 });

    let mut rng = rng_for(seed);
    let ec: Vec<f64> = uniform_vec(&mut rng, n).into_iter().map(|v| scale * v).collect();
    let mut er: Vec<f64> = uniform_vec(&mut rng, w).into_iter().map(|v| scale * v).collect();
    er[0] = ec[0];
    let a = Matrix::from_fn(n, w, |i, j| {
        let e = if i >= j { ec[i - j] } else { er[j - i] };
        t[(i, j)] + e
    });
    let b: Vec<f64> = uniform_vec(&mut rng, n)
        .into_iter()
        .map(|v| 1.0 + scale * v)
        .collect();
    Ok(TlsProblem {
        a,
        b,
        x_true: None,
        label: "toeplitz".into(),
        seed,
        epsilon: scale,
        params: BTreeMap::from([
            ("n".into(), n as f64),
            ("omega".into(), omega as f64),
            ("alpha".into(), alpha),
        ]),
    })
}

/// Near-defective contrast instance: n×(n−2), diagonal n−1 on the top block,
/// −1 everywhere else, b = (−1, …, −1, n−1, −1)ᵀ; additive ε·U(0,1) on both.
/// Draw order: E (n·(n−2), row-major), e (n).
pub fn gen_vanhuffel(n: usize, epsilon: f64, seed: u64) -> Result<TlsProblem> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need n >= 4, got {n}")));
    }
    let w = n - 2;
    let a0 = Matrix::from_fn(n, w, |i, j| if i == j { n as f64 - 1.0 } else { -1.0 });
    let mut b0 = vec![-1.0; n];
    b0[n - 2] = n as f64 - 1.0;
    let mut rng = rng_for(seed);
    let noise = uniform_matrix(&mut rng, n, w);
    let a = Matrix::from_fn(n, w, |i, j| a0[(i, j)] + epsilon * noise[(i, j)]);
    let b: Vec<f64> = b0
        .iter()
        .zip(uniform_vec(&mut rng, n))
        .map(|(v, e)| v + epsilon * e)
        .collect();
    Ok(TlsProblem {
        a,
        b,
        x_true: None,
        label: "vanhuffel".into(),
        seed,
        epsilon,
        params: BTreeMap::from([("n".into(), n as f64)]),
    })
}

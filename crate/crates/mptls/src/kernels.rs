//! Format-parameterized vector/matrix kernels with per-operation rounding.
//!
//! Every elementary multiply/add/divide/square-root inside these kernels is
//! rounded into the requested [`FpFormat`] (the chop methodology). The
//! [`Runtime`] threads the flop tally and arithmetic-event counters through a
//! solver run; substrate-format calls skip rounding but still charge flops.

use crate::error::{Error, Result};
use crate::flops::{charges, FlopCounter, Kernel};
use crate::matrix::Matrix;
use crate::precision::{EventCounters, FpFormat};

/// Per-solver-run mutable state: operation tallies plus arithmetic events.
#[derive(Debug, Clone, Default)]
pub struct Runtime {
    pub tally: FlopCounter,
    pub events: EventCounters,
}

impl Runtime {
    pub fn new() -> Runtime {
        Runtime::default()
    }

    /// Rounds a substrate value into `fmt`, recording overflow/underflow events.
    #[inline]
    pub fn round(&mut self, fmt: &FpFormat, x: f64) -> f64 {
        if fmt.is_substrate() {
            return x;
        }
        let y = fmt.round(x);
        if x.is_finite() && y.is_infinite() {
            self.events.overflow += 1;
        } else if x != 0.0 && y == 0.0 {
            self.events.underflow += 1;
        }
        y
    }

    /// Rounded division with a divide-by-zero event counter.
    #[inline]
    pub fn div(&mut self, fmt: &FpFormat, a: f64, b: f64) -> f64 {
        if b == 0.0 && a != 0.0 {
            self.events.div_by_zero += 1;
        }
        self.round(fmt, a / b)
    }
}

/// Elementary simulated operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// One elementary operation computed in the substrate and rounded into `fmt`.
/// This is the choke point all simulated arithmetic reduces to.
pub fn simulated_op(a: f64, b: f64, op: SimOp, fmt: &FpFormat) -> f64 {
    let v = match op {
        SimOp::Add => a + b,
        SimOp::Sub => a - b,
        SimOp::Mul => a * b,
        SimOp::Div => a / b,
    };
    fmt.round(v)
}

/// Elementwise rounding of a vector (no flop charge — storage conversion).
pub fn round_vec(rt: &mut Runtime, fmt: &FpFormat, v: &[f64]) -> Vec<f64> {
    if fmt.is_substrate() {
        return v.to_vec();
    }
    v.iter().map(|&x| rt.round(fmt, x)).collect()
}

/// Sequential inner product; charges 2n − 1.
pub fn dot(rt: &mut Runtime, fmt: &FpFormat, x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    rt.tally.charge(Kernel::Dot, &fmt.name, charges::dot(x.len()));
    dot_uncharged(rt, fmt, x, y)
}

/// Inner product with rounding but no flop charge (for diagnostics like ψ
/// that sit outside the cost model).
pub fn dot_uncharged(rt: &mut Runtime, fmt: &FpFormat, x: &[f64], y: &[f64]) -> f64 {
    if fmt.is_substrate() {
        let mut s = 0.0;
        for (xi, yi) in x.iter().zip(y) {
            s += xi * yi;
        }
        return s;
    }
    let mut s = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let p = rt.round(fmt, xi * yi);
        s = rt.round(fmt, s + p);
    }
    s
}

/// Euclidean norm; charges 2n (dot plus one square root).
pub fn norm2(rt: &mut Runtime, fmt: &FpFormat, x: &[f64]) -> f64 {
    rt.tally.charge(Kernel::Norm2, &fmt.name, charges::norm2(x.len()));
    let s = dot_uncharged(rt, fmt, x, x);
    rt.round(fmt, s.sqrt())
}

/// y = Ax; charges 2mn − m.
pub fn matvec(rt: &mut Runtime, fmt: &FpFormat, a: &Matrix, x: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    debug_assert_eq!(x.len(), n);
    rt.tally.charge(Kernel::MatVec, &fmt.name, charges::matvec(m, n));
    let mut y = vec![0.0; m];
    if fmt.is_substrate() {
        for j in 0..n {
            let col = a.col(j);
            let xj = x[j];
            for i in 0..m {
                y[i] += col[i] * xj;
            }
        }
        return y;
    }
    for (i, yi) in y.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..n {
            let p = rt.round(fmt, a[(i, j)] * x[j]);
            s = rt.round(fmt, s + p);
        }
        *yi = s;
    }
    y
}

/// y = Aᵀx; charges 2mn − n.
pub fn matvec_t(rt: &mut Runtime, fmt: &FpFormat, a: &Matrix, x: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    debug_assert_eq!(x.len(), m);
    rt.tally
        .charge(Kernel::MatVecT, &fmt.name, charges::matvec_t(m, n));
    (0..n).map(|j| dot_uncharged(rt, fmt, a.col(j), x)).collect()
}

/// y + λx elementwise; charges 2n.
pub fn axpy(rt: &mut Runtime, fmt: &FpFormat, lambda: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    rt.tally.charge(Kernel::Axpy, &fmt.name, charges::axpy(x.len()));
    if fmt.is_substrate() {
        return x.iter().zip(y).map(|(xi, yi)| yi + lambda * xi).collect();
    }
    x.iter()
        .zip(y)
        .map(|(xi, yi)| {
            let p = rt.round(fmt, lambda * xi);
            rt.round(fmt, yi + p)
        })
        .collect()
}

/// x + y elementwise; charges n.
pub fn vec_add(rt: &mut Runtime, fmt: &FpFormat, x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    rt.tally
        .charge(Kernel::VecAdd, &fmt.name, charges::vec_elementwise(x.len()));
    x.iter().zip(y).map(|(xi, yi)| rt.round(fmt, xi + yi)).collect()
}

/// −x elementwise; charges n.
pub fn vec_negate(rt: &mut Runtime, fmt: &FpFormat, x: &[f64]) -> Vec<f64> {
    rt.tally.charge(
        Kernel::VecNegate,
        &fmt.name,
        charges::vec_elementwise(x.len()),
    );
    x.iter().map(|&xi| rt.round(fmt, -xi)).collect()
}

/// Solves Rx = rhs (backward) or Rᵀx = rhs (forward) for upper-triangular R
/// with per-operation rounding; charges n². Rejects exactly-zero diagonals.
pub fn tri_solve(
    rt: &mut Runtime,
    fmt: &FpFormat,
    r: &Matrix,
    rhs: &[f64],
    transposed: bool,
) -> Result<Vec<f64>> {
    let n = r.cols();
    if r.rows() != n || rhs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "tri_solve: {}x{} with rhs length {}",
            r.rows(),
            n,
            rhs.len()
        )));
    }
    for i in 0..n {
        if r[(i, i)] == 0.0 {
            return Err(Error::RankDeficient(format!(
                "zero diagonal entry at position {i} in triangular solve"
            )));
        }
    }
    rt.tally
        .charge(Kernel::TriSolve, &fmt.name, charges::tri_solve(n));
    let mut x = vec![0.0; n];
    if transposed {
        // Rᵀx = rhs: forward substitution down the columns of R.
        for i in 0..n {
            let mut s = rhs[i];
            for j in 0..i {
                let p = rt.round(fmt, r[(j, i)] * x[j]);
                s = rt.round(fmt, s - p);
            }
            x[i] = rt.div(fmt, s, r[(i, i)]);
        }
    } else {
        // Rx = rhs: backward substitution.
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in i + 1..n {
                let p = rt.round(fmt, r[(i, j)] * x[j]);
                s = rt.round(fmt, s - p);
            }
            x[i] = rt.div(fmt, s, r[(i, i)]);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp64() -> FpFormat {
        FpFormat::fp64()
    }

    #[test]
    fn matvec_identity_and_hand_value() {
        let mut rt = Runtime::new();
        let i3 = Matrix::identity(3);
        assert_eq!(matvec(&mut rt, &fp64(), &i3, &[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(matvec(&mut rt, &fp64(), &a, &[1.0, 1.0]), vec![3.0, 7.0]);
        let z = Matrix::zeros(2, 2);
        assert_eq!(matvec(&mut rt, &fp64(), &z, &[4.0, 5.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn flop_charges_are_exact() {
        let fmt = fp64();
        let a = Matrix::zeros(7, 4);
        let mut rt = Runtime::new();
        matvec(&mut rt, &fmt, &a, &[0.0; 4]);
        assert_eq!(rt.tally.total(), 2 * 7 * 4 - 7);
        let mut rt = Runtime::new();
        matvec_t(&mut rt, &fmt, &a, &[0.0; 7]);
        assert_eq!(rt.tally.total(), 2 * 7 * 4 - 4);
        let mut rt = Runtime::new();
        dot(&mut rt, &fmt, &[1.0; 9], &[1.0; 9]);
        assert_eq!(rt.tally.total(), 17);
        let mut rt = Runtime::new();
        axpy(&mut rt, &fmt, 2.0, &[1.0; 9], &[1.0; 9]);
        assert_eq!(rt.tally.total(), 18);
        let mut rt = Runtime::new();
        tri_solve(&mut rt, &fmt, &Matrix::identity(6), &[1.0; 6], false).unwrap();
        assert_eq!(rt.tally.total(), 36);
    }

    #[test]
    fn dot_and_axpy_basics() {
        let mut rt = Runtime::new();
        assert_eq!(dot(&mut rt, &fp64(), &[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(
            axpy(&mut rt, &fp64(), 0.0, &[9.0, 9.0], &[1.0, 2.0]),
            vec![1.0, 2.0]
        );
        assert_eq!(norm2(&mut rt, &fp64(), &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn tri_solve_examples() {
        let mut rt = Runtime::new();
        let fmt = fp64();
        let i = Matrix::identity(4);
        assert_eq!(
            tri_solve(&mut rt, &fmt, &i, &[1.0, 2.0, 3.0, 4.0], false).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        let d = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(
            tri_solve(&mut rt, &fmt, &d, &[2.0, 8.0], false).unwrap(),
            vec![1.0, 2.0]
        );
        let u = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            tri_solve(&mut rt, &fmt, &u, &[2.0, 1.0], false).unwrap(),
            vec![1.0, 1.0]
        );
        // Transposed solve: Rᵀ x = rhs with R = [[1,1],[0,1]] is lower-triangular.
        assert_eq!(
            tri_solve(&mut rt, &fmt, &u, &[1.0, 2.0], true).unwrap(),
            vec![1.0, 1.0]
        );
        let singular = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(tri_solve(&mut rt, &fmt, &singular, &[1.0, 1.0], false).is_err());
    }

    #[test]
    fn fp16_rounding_inside_kernels() {
        let fmt = FpFormat::fp16();
        let mut rt = Runtime::new();
        // Adding a value below half an ulp of 1 leaves 1 unchanged in fp16.
        let y = axpy(&mut rt, &fmt, 1.0, &[(2.0f64).powi(-12)], &[1.0]);
        assert_eq!(y, vec![1.0]);
        // Saturation is recorded.
        let s = dot(&mut rt, &fmt, &[1024.0, 1024.0], &[1024.0, 1024.0]);
        assert!(s.is_infinite());
        assert!(rt.events.overflow > 0);
    }

    #[test]
    fn simulated_op_reference_values() {
        let h = FpFormat::fp16();
        assert_eq!(simulated_op(1.0, 1.0, SimOp::Add, &FpFormat::fp64()), 2.0);
        // Tie halfway between 1 and the next fp16 number lands on the even side.
        assert_eq!(simulated_op(1.0, (2.0f64).powi(-11), SimOp::Add, &h), 1.0);
        assert_eq!(
            simulated_op(65536.0, 65536.0, SimOp::Add, &h),
            f64::INFINITY
        );
    }
}

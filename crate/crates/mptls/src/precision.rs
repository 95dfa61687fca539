//! Simulated reduced-precision floating-point formats over an f64 substrate.
//!
//! Every elementary operation of a simulated computation is performed in f64 and
//! then rounded into the target format with round-to-nearest, ties to even.
//! Subnormals are supported; results beyond the format's overflow threshold
//! saturate to signed infinity (and are counted by the caller's event counters).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Description of a binary floating-point format.
///
/// `t` counts significand bits *including* the implicit leading bit, so IEEE
/// binary16 is `t = 11`, binary32 is `t = 24`, binary64 is `t = 53`. `e_min`
/// and `e_max` bound the exponent of the leading significand bit (IEEE
/// convention: binary16 has `e_min = -14`, `e_max = 15`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpFormat {
    pub name: String,
    pub t: u32,
    pub e_min: i32,
    pub e_max: i32,
    pub supports_subnormals: bool,
    /// True when the format equals the f64 substrate, letting kernels skip
    /// per-operation rounding entirely.
    substrate: bool,
}

impl FpFormat {
    /// Builds a custom format. Limits: `2 <= t <= 53`, `-1022 <= e_min < e_max <= 1023`.
    pub fn new(name: impl Into<String>, t: u32, e_min: i32, e_max: i32) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidFormat("format name must be nonempty".into()));
        }
        if !(2..=53).contains(&t) {
            return Err(Error::InvalidFormat(format!(
                "significand bits t={t} outside [2, 53]"
            )));
        }
        if e_min < -1022 || e_max > 1023 || e_min >= e_max {
            return Err(Error::InvalidFormat(format!(
                "exponent range [{e_min}, {e_max}] must satisfy -1022 <= e_min < e_max <= 1023"
            )));
        }
        let substrate = t == 53 && e_min == -1022 && e_max == 1023;
        Ok(FpFormat {
            name,
            t,
            e_min,
            e_max,
            supports_subnormals: true,
            substrate,
        })
    }

    /// IEEE binary16 (half precision).
    pub fn fp16() -> Self {
        FpFormat::new("fp16", 11, -14, 15).expect("fp16 preset is valid")
    }

    /// IEEE binary32 (single precision).
    pub fn fp32() -> Self {
        FpFormat::new("fp32", 24, -126, 127).expect("fp32 preset is valid")
    }

    /// IEEE binary64 (double precision) — identical to the substrate.
    pub fn fp64() -> Self {
        FpFormat::new("fp64", 53, -1022, 1023).expect("fp64 preset is valid")
    }

    /// Looks up a preset by name.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "fp16" | "half" => Ok(Self::fp16()),
            "fp32" | "single" => Ok(Self::fp32()),
            "fp64" | "double" => Ok(Self::fp64()),
            other => Err(Error::InvalidFormat(format!("unknown format preset '{other}'"))),
        }
    }

    /// Unit roundoff u = 2^(-t).
    pub fn unit_roundoff(&self) -> f64 {
        (2.0f64).powi(-(self.t as i32))
    }

    /// Largest finite representable magnitude: 2^e_max · (2 − 2^(1−t)).
    pub fn max_finite(&self) -> f64 {
        ldexp(2.0 - ldexp(1.0, 1 - self.t as i32), self.e_max)
    }

    /// Smallest positive normal magnitude: 2^e_min.
    pub fn min_normal(&self) -> f64 {
        ldexp(1.0, self.e_min)
    }

    /// Smallest positive subnormal magnitude: 2^(e_min − t + 1).
    pub fn min_subnormal(&self) -> f64 {
        ldexp(1.0, self.e_min - self.t as i32 + 1)
    }

    /// Overflow threshold: magnitudes at or above 2^e_max · (2 − 2^(−t))
    /// round to infinity under round-to-nearest.
    pub fn overflow_threshold(&self) -> f64 {
        ldexp(2.0 - ldexp(1.0, -(self.t as i32)), self.e_max)
    }

    /// Whether this format is the f64 substrate (rounding is the identity).
    pub fn is_substrate(&self) -> bool {
        self.substrate
    }

    /// Rounds an f64 value into this format (round-to-nearest, ties to even).
    ///
    /// Zero, infinities, and NaN pass through unchanged. Finite values with
    /// magnitude at or above [`Self::overflow_threshold`] become signed
    /// infinity. Values below the subnormal range round to (signed) zero.
    pub fn round(&self, x: f64) -> f64 {
        if self.substrate || x == 0.0 || !x.is_finite() {
            return x;
        }
        let a = x.abs();
        let sign = if x > 0.0 { 1.0 } else { -1.0 };
        if a >= self.overflow_threshold() {
            return sign * f64::INFINITY;
        }
        // Decompose a = frac * 2^e with frac in [0.5, 1); the leading-bit
        // exponent is then e - 1.
        let (_, e_raw) = frexp(a);
        let e = e_raw - 1;
        // Scale so the rounding boundary sits at integer spacing: normal
        // numbers keep t significand bits at exponent e; subnormals keep a
        // fixed grid at e_min.
        let k = if e >= self.e_min {
            self.t as i32 - 1 - e
        } else {
            self.t as i32 - 1 - self.e_min
        };
        let y = ldexp(a, k).round_ties_even();
        sign * ldexp(y, -k)
    }

    /// Spacing between representable numbers in [2^e, 2^(e+1)) — diagnostic helper.
    pub fn ulp_at(&self, x: f64) -> f64 {
        if x == 0.0 || !x.is_finite() {
            return self.min_subnormal();
        }
        let (_, e_raw) = frexp(x.abs());
        let e = (e_raw - 1).max(self.e_min);
        ldexp(1.0, e - self.t as i32 + 1)
    }
}

/// x · 2^k with exact scaling, valid for any k (chunked when |k| exceeds the
/// f64 exponent range so intermediate scale factors stay finite).
pub fn ldexp(x: f64, k: i32) -> f64 {
    fn pow2(k: i32) -> f64 {
        debug_assert!((-1022..=1023).contains(&k));
        f64::from_bits(((1023 + k) as u64) << 52)
    }
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mut v = x;
    let mut rem = k;
    while rem > 1000 {
        v *= pow2(1000);
        rem -= 1000;
    }
    while rem < -1000 {
        v *= pow2(-1000);
        rem += 1000;
    }
    v * pow2(rem)
}

/// Decomposes x ≠ 0 into (fraction, exponent) with fraction in ±[0.5, 1) and
/// x = fraction · 2^exponent. Subnormal inputs are pre-scaled so the bit
/// extraction stays exact.
pub fn frexp(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let mut v = x;
    let mut adjust = 0i32;
    if v.abs() < f64::MIN_POSITIVE {
        // Scale subnormals into the normal range first (2^64 is exact).
        v *= ldexp(1.0, 64);
        adjust = -64;
    }
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let e = biased - 1022; // so that fraction lies in [0.5, 1)
    let fraction_bits = (bits & !(0x7ffu64 << 52)) | (1022u64 << 52);
    (f64::from_bits(fraction_bits), e + adjust)
}

/// Arithmetic-event tallies accumulated while rounding results into a format.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounters {
    /// Finite results saturated to ±infinity.
    pub overflow: u64,
    /// Nonzero results rounded to zero (lost below the subnormal range).
    pub underflow: u64,
    /// Divisions with a zero denominator and nonzero numerator.
    pub div_by_zero: u64,
}

impl EventCounters {
    pub fn merge(&mut self, other: &EventCounters) {
        self.overflow += other.overflow;
        self.underflow += other.underflow;
        self.div_by_zero += other.div_by_zero;
    }
}

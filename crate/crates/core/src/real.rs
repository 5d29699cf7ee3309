//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the library can run on (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
{
    /// Converts an `f64` literal, rounding if needed.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (tree) sum with a fixed reduction order.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const BLOCK: usize = 128;
    if xs.len() <= BLOCK {
        let mut s = T::zero();
        for &x in xs {
            s = s + x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n` without materializing the terms.
pub fn pairwise_sum_by<T: Real, F: Fn(usize) -> T>(n: usize, f: &F) -> T {
    fn go<T: Real, F: Fn(usize) -> T>(lo: usize, hi: usize, f: &F) -> T {
        const BLOCK: usize = 128;
        if hi - lo <= BLOCK {
            let mut s = T::zero();
            for i in lo..hi {
                s = s + f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f) + go(mid, hi, f)
    }
    go(0, n, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 49_995_000.0);
        assert_eq!(pairwise_sum_by(10_000, &|i| i as f64), 49_995_000.0);
    }

    #[test]
    fn pairwise_beats_naive_on_f32() {
        let n = 1 << 20;
        let s: f32 = pairwise_sum_by(n, &|_| 0.1f32);
        assert!((s as f64 - 0.1 * n as f64).abs() / (0.1 * n as f64) < 1e-5);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::real::Real;

/// Upper bound on `n^3` accepted by [`BoxGrid::new`].
pub const DEFAULT_MAX_POINTS: usize = 1 << 24;

/// Uniform periodic grid on `[-L/2, L/2)^3` with `n` nodes per axis.
///
/// Node `i` sits at `-L/2 + i h`, so the origin is a grid node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid<T> {
    pub n: usize,
    pub length: T,
}

impl<T: Real> BoxGrid<T> {
    pub fn new(n: usize, length: T) -> Result<Self> {
        Self::with_cap(n, length, DEFAULT_MAX_POINTS)
    }

    pub fn with_cap(n: usize, length: T, max_points: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(domain(format!("grid size {n} must be a power of two >= 2")));
        }
        if n.checked_pow(3).map_or(true, |p| p > max_points) {
            return Err(domain(format!("{n}^3 points exceed the cap of {max_points}")));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(domain(format!("box length {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_usize_lossy(self.n)
    }

    pub fn cell_volume(&self) -> T {
        let h = self.spacing();
        h * h * h
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coordinate(&self, i: usize) -> T {
        -self.length / T::lit(2.0) + T::from_usize_lossy(i) * self.spacing()
    }

    pub fn point(&self, idx: usize) -> [T; 3] {
        let n = self.n;
        [
            self.coordinate(idx % n),
            self.coordinate((idx / n) % n),
            self.coordinate(idx / (n * n)),
        ]
    }

    /// Same node count, box shrunk by `1/lambda`.
    pub fn rescaled(&self, lambda: T) -> Result<Self> {
        Self::new(self.n, self.length / lambda)
    }

    pub fn cast<U: Real>(&self) -> BoxGrid<U> {
        BoxGrid {
            n: self.n,
            length: U::lit(self.length.to_f64_lossy()),
        }
    }
}

//! The truncated Riesz multiplier `Ψ_a(ξ) = i ξ_a ψ(ξ)/|ξ|` and the `L^1` norm
//! of its inverse Fourier transform.
//!
//! The kernel is sampled on the periodic box `[-R, R)^3`, whose dual lattice
//! has spacing `π/R`. The box sum of `|Ψ̆_a|` is taken with the trapezoid
//! rule (nodes at `y = j Δy`) and the midpoint rule (nodes shifted by `Δy/2`),
//! both refined by grid doubling and Richardson-extrapolated.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::bump::smoothstep;
use crate::error::{domain, Error, Result};
use crate::real::{pairwise_sum_by, Real};
use crate::spectral::{frequency, Fft3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// `ψ(ξ) = s(2(1 - |ξ|))` with the exponential smoothstep `s`.
    ExpSmoothstep,
    /// `ψ ≡ 0`.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec<T> {
    pub profile: CutoffProfile,
    /// `σ` in `exp(-σ/x)`.
    pub smoothing: T,
    /// Finest resolution per axis.
    pub n: usize,
    /// Half-width `R` of the physical box.
    pub half_width: T,
    /// Relative tolerance for the refinement error estimate.
    pub tolerance: T,
}

impl<T: Real> Default for CutoffSpec<T> {
    fn default() -> Self {
        Self {
            profile: CutoffProfile::ExpSmoothstep,
            smoothing: T::one(),
            n: 128,
            half_width: T::lit(2.0) * T::PI(),
            tolerance: T::lit(1e-4),
        }
    }
}

impl<T: Real> CutoffSpec<T> {
    /// Radial profile `ψ(|ξ|)`.
    pub fn psi(&self, r: T) -> T {
        match self.profile {
            CutoffProfile::ExpSmoothstep => {
                smoothstep(T::lit(2.0) * (T::one() - r), self.smoothing)
            }
            CutoffProfile::Zero => T::zero(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 64 || !self.n.is_power_of_two() {
            return Err(domain(format!(
                "cutoff resolution {} must be a power of two >= 64",
                self.n
            )));
        }
        if !(self.half_width > T::zero()) || !(self.smoothing > T::zero()) {
            return Err(domain("half-width and smoothing must be positive"));
        }
        if !(self.tolerance > T::zero()) {
            return Err(domain("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Trapezoid,
    Midpoint,
}

/// Box sums of `|Ψ̆_a|` at one resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSums<T> {
    pub n: usize,
    pub trapezoid: [T; 3],
    pub midpoint: [T; 3],
}

/// Result of [`compute_c_infty`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CInfty<T> {
    pub value: T,
    pub error: T,
    /// Extrapolated trapezoid values per axis at the finest level.
    pub per_axis: [T; 3],
    /// Extrapolated midpoint value (max over axes) at the finest level.
    pub midpoint_value: T,
    /// Extrapolated value at the previous level.
    pub coarse_value: T,
    pub sums: Vec<RuleSums<T>>,
}

/// Box sums of `|Ψ̆_a|` for both rules on an `m^3` grid.
pub fn rule_sums<T: Real>(cutoff: &CutoffSpec<T>, m: usize) -> Result<RuleSums<T>> {
    let r_box = cutoff.half_width;
    let dxi = T::PI() / r_box;
    let support = (T::one() / dxi).to_f64_lossy();
    if support + 1.0 >= (m / 2) as f64 {
        return Err(domain(format!(
            "resolution {m} cannot resolve the multiplier support for half-width {r_box}"
        )));
    }
    let dy = T::lit(2.0) * r_box / T::from_usize_lossy(m);
    let len = m * m * m;
    let fft = Fft3::<T>::new(m);
    let norm = T::from_usize_lossy(len) / (T::lit(8.0) * r_box * r_box * r_box);
    let cell = dy * dy * dy;

    let jobs = [
        (0, Rule::Trapezoid),
        (1, Rule::Trapezoid),
        (2, Rule::Trapezoid),
        (0, Rule::Midpoint),
        (1, Rule::Midpoint),
        (2, Rule::Midpoint),
    ];
    let mut out = [T::zero(); 6];
    let mut z = vec![Complex::<T>::default(); len];
    for pair in 0..3 {
        let (ja, jb) = (jobs[2 * pair], jobs[2 * pair + 1]);
        for (idx, slot) in z.iter_mut().enumerate() {
            let (i, j, k) = (idx % m, (idx / m) % m, idx / (m * m));
            let xi = [
                T::lit(frequency(i, m) as f64) * dxi,
                T::lit(frequency(j, m) as f64) * dxi,
                T::lit(frequency(k, m) as f64) * dxi,
            ];
            let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            if r == T::zero() || r >= T::one() {
                *slot = Complex::default();
                continue;
            }
            let amp = cutoff.psi(r) / r;
            let value = |(axis, rule): (usize, Rule)| -> Complex<T> {
                let v = Complex::new(T::zero(), xi[axis] * amp);
                match rule {
                    Rule::Trapezoid => v,
                    Rule::Midpoint => {
                        let phase = (xi[0] + xi[1] + xi[2]) * dy * T::lit(0.5);
                        v * Complex::new(phase.cos(), phase.sin())
                    }
                }
            };
            let a = value(ja);
            let b = value(jb);
            *slot = a + Complex::new(-b.im, b.re);
        }
        fft.inverse(&mut z);
        out[2 * pair] = pairwise_sum_by(len, &|i| z[i].re.abs()) * norm * cell;
        out[2 * pair + 1] = pairwise_sum_by(len, &|i| z[i].im.abs()) * norm * cell;
    }
    Ok(RuleSums {
        n: m,
        trapezoid: [out[0], out[1], out[2]],
        midpoint: [out[3], out[4], out[5]],
    })
}

fn richardson<T: Real>(coarse: T, fine: T) -> T {
    fine + (fine - coarse) / T::lit(3.0)
}

fn max3<T: Real>(v: [T; 3]) -> T {
    v[0].max(v[1]).max(v[2])
}

/// Richardson-extrapolated trapezoid values `max_a C_a` at each level after
/// the first.
pub fn refinement_table<T: Real>(cutoff: &CutoffSpec<T>, levels: &[usize]) -> Result<Vec<(usize, T)>> {
    let sums = levels
        .iter()
        .map(|&m| rule_sums(cutoff, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(sums
        .windows(2)
        .map(|w| {
            let axes: [T; 3] = std::array::from_fn(|a| richardson(w[0].trapezoid[a], w[1].trapezoid[a]));
            (w[1].n, max3(axes))
        })
        .collect())
}

/// `C_∞ = max_a ‖Ψ̆_a‖_{L^1}` on the truncated box with an error estimate.
///
/// Uses the levels `n/4, n/2, n`. The value is the extrapolated trapezoid sum
/// at `n`; the error is the larger of the change from the extrapolated value
/// at `n/2` and the trapezoid/midpoint disagreement at `n`.
pub fn compute_c_infty<T: Real>(cutoff: &CutoffSpec<T>) -> Result<CInfty<T>> {
    cutoff.validate()?;
    let n = cutoff.n;
    let sums = [n / 4, n / 2, n]
        .iter()
        .map(|&m| rule_sums(cutoff, m))
        .collect::<Result<Vec<_>>>()?;
    let ext = |a: &RuleSums<T>, b: &RuleSums<T>, rule: Rule| -> [T; 3] {
        std::array::from_fn(|i| match rule {
            Rule::Trapezoid => richardson(a.trapezoid[i], b.trapezoid[i]),
            Rule::Midpoint => richardson(a.midpoint[i], b.midpoint[i]),
        })
    };
    let coarse = max3(ext(&sums[0], &sums[1], Rule::Trapezoid));
    let per_axis = ext(&sums[1], &sums[2], Rule::Trapezoid);
    let value = max3(per_axis);
    let midpoint_value = max3(ext(&sums[1], &sums[2], Rule::Midpoint));
    let error = (value - coarse).abs().max((value - midpoint_value).abs());

    let limit = T::lit(10.0) * cutoff.tolerance * value.abs();
    if error > limit {
        return Err(Error::Refinement {
            coarse: coarse.to_f64_lossy(),
            fine: value.to_f64_lossy(),
        });
    }
    let spread = (per_axis[0] - per_axis[1])
        .abs()
        .max((per_axis[0] - per_axis[2]).abs());
    if spread > error {
        return Err(Error::Invariant(format!(
            "per-axis values {per_axis:?} differ by more than the error estimate {error}"
        )));
    }
    Ok(CInfty {
        value,
        error,
        per_axis,
        midpoint_value,
        coarse_value: coarse,
        sums,
    })
}

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bump::{smoothstep, smoothstep_deriv};
use crate::constants::LebesgueExponent;
use crate::error::{domain, Error, Result};
use crate::fields::{BoxGrid, GridField};
use crate::real::Real;
use crate::spectral::{Fft3, C};

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn four() -> f64 {
    4.0
}

fn first() -> usize {
    1
}

/// Analytic or seeded field generator. Coordinates below are the scaled
/// coordinates `y = scale * x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampler {
    Zero,
    /// `amplitude * exp(-|y|^2 / width^2)` in one component (not solenoidal).
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "first")]
        component: usize,
    },
    /// `λ ψ(αλ y)` with `ψ = (∂₃φ, -∂₃φ, ∂₂φ - ∂₁φ)` and the radial bump
    /// `φ(r) = s(2 - r)`, equal to 1 for `r <= 1` and 0 for `r >= 2`.
    PaperExample {
        alpha: f64,
        lambda: f64,
        #[serde(default = "one")]
        smoothing: f64,
    },
    /// Curl of `(0, 0, (a/k) sin(k y₁) sin(k y₂) cos(k y₃) exp(-|y|²/w²))`.
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
        #[serde(default = "two")]
        envelope: f64,
    },
    /// Curl of a random potential with lattice modes `0 < |m| <= kmax` on the
    /// periodic cell of edge `period`; `amplitude` is the RMS speed.
    RandomSolenoidal {
        #[serde(default = "one")]
        amplitude: f64,
        seed: u64,
        period: f64,
        #[serde(default = "four")]
        kmax: f64,
    },
    /// Three independent random components with lattice modes `|m| <= kmax`,
    /// including the mean; `amplitude` is the RMS magnitude.
    RandomBandLimited {
        #[serde(default = "one")]
        amplitude: f64,
        seed: u64,
        period: f64,
        #[serde(default = "one")]
        kmax: f64,
    },
}

/// A sampler plus the parabolic rescaling `u → scale · u(scale · x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRecipe {
    #[serde(flatten)]
    pub sampler: Sampler,
    #[serde(default = "one")]
    pub scale: f64,
}

impl From<Sampler> for FieldRecipe {
    fn from(sampler: Sampler) -> Self {
        Self { sampler, scale: 1.0 }
    }
}

impl FieldRecipe {
    pub fn new(sampler: Sampler) -> Self {
        sampler.into()
    }

    pub fn id(&self) -> &'static str {
        match self.sampler {
            Sampler::Zero => "zero",
            Sampler::Gaussian { .. } => "gaussian",
            Sampler::PaperExample { .. } => "paper_example",
            Sampler::TaylorGreen { .. } => "taylor_green",
            Sampler::RandomSolenoidal { .. } => "random_solenoidal",
            Sampler::RandomBandLimited { .. } => "random_band_limited",
        }
    }

    pub fn rescaled(&self, lambda: f64) -> Self {
        Self {
            sampler: self.sampler.clone(),
            scale: self.scale * lambda,
        }
    }

    pub fn is_solenoidal(&self) -> bool {
        !matches!(
            self.sampler,
            Sampler::Gaussian { .. } | Sampler::RandomBandLimited { .. }
        )
    }

    /// Random samplers describe one period of a periodic field.
    pub fn is_periodic(&self) -> bool {
        matches!(
            self.sampler,
            Sampler::RandomSolenoidal { .. } | Sampler::RandomBandLimited { .. }
        )
    }

    pub fn is_band_limited(&self) -> bool {
        matches!(self.sampler, Sampler::RandomBandLimited { .. })
    }

    /// Radius of the support in `x`, for compactly supported samplers.
    pub fn support_radius(&self) -> Option<f64> {
        match self.sampler {
            Sampler::PaperExample { alpha, lambda, .. } => Some(2.0 / (alpha * lambda * self.scale)),
            _ => None,
        }
    }

    /// Edge length of a box that comfortably holds the field.
    pub fn natural_length(&self) -> f64 {
        let base = match self.sampler {
            Sampler::Zero => 1.0,
            Sampler::Gaussian { width, .. } => 12.0 * width,
            Sampler::PaperExample { alpha, lambda, .. } => 5.0 / (alpha * lambda),
            Sampler::TaylorGreen { envelope, .. } => 8.0 * envelope,
            Sampler::RandomSolenoidal { period, .. } | Sampler::RandomBandLimited { period, .. } => period,
        };
        base / self.scale
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} = {v} must be positive")))
            }
        };
        positive("scale", self.scale)?;
        match self.sampler {
            Sampler::Zero => Ok(()),
            Sampler::Gaussian { width, component, .. } => {
                positive("width", width)?;
                if !(1..=3).contains(&component) {
                    return Err(domain(format!("component {component} must be 1, 2 or 3")));
                }
                Ok(())
            }
            Sampler::PaperExample { alpha, lambda, smoothing } => {
                positive("alpha", alpha)?;
                positive("lambda", lambda)?;
                positive("smoothing", smoothing)
            }
            Sampler::TaylorGreen { wavenumber, envelope, .. } => {
                positive("wavenumber", wavenumber)?;
                positive("envelope", envelope)
            }
            Sampler::RandomSolenoidal { period, kmax, .. }
            | Sampler::RandomBandLimited { period, kmax, .. } => {
                positive("period", period)?;
                positive("kmax", kmax)
            }
        }
    }
}

fn cast3<T: Real>(v: [f64; 3]) -> [T; 3] {
    v.map(T::lit)
}

/// Samples a recipe on a grid. Values are exact pointwise samples; call
/// [`GridField::leray_projected`] to remove the discrete divergence left by
/// truncating a non-band-limited field.
pub fn sample_analytic<T: Real>(recipe: &FieldRecipe, grid: BoxGrid<T>) -> Result<GridField<T>> {
    recipe.validate()?;
    let s = recipe.scale;
    let len = grid.len();
    let point = |idx: usize| -> [f64; 3] { grid.point(idx).map(|x| x.to_f64_lossy() * s) };
    let pointwise = |f: &dyn Fn([f64; 3]) -> [f64; 3]| -> [Vec<T>; 3] {
        let mut comps = [vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]];
        for idx in 0..len {
            let v: [T; 3] = cast3(f(point(idx)).map(|c| c * s));
            for c in 0..3 {
                comps[c][idx] = v[c];
            }
        }
        comps
    };

    let mut field = match recipe.sampler {
        Sampler::Zero => GridField::zeros(grid),
        Sampler::Gaussian { amplitude, width, component } => {
            let comps = pointwise(&|y| {
                let mut v = [0.0; 3];
                v[component - 1] = amplitude * (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (width * width)).exp();
                v
            });
            GridField::from_components(grid, comps)?
        }
        Sampler::PaperExample { alpha, lambda, smoothing } => {
            let radius = recipe.support_radius().expect("compact support");
            let required = 2.0 * radius;
            let actual = grid.length.to_f64_lossy();
            if actual <= required {
                return Err(Error::BoxTooSmall { required, actual });
            }
            let comps = pointwise(&|y| {
                let z = y.map(|c| c * alpha * lambda);
                paper_psi(z, smoothing).map(|c| c * lambda)
            });
            GridField::from_components(grid, comps)?
        }
        Sampler::TaylorGreen { amplitude, wavenumber: k, envelope: w } => {
            let comps = pointwise(&|y| {
                let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (w * w)).exp();
                let (s1, c1) = (k * y[0]).sin_cos();
                let (s2, c2) = (k * y[1]).sin_cos();
                let c3 = (k * y[2]).cos();
                let a = amplitude / k;
                let d2 = a * g * (k * s1 * c2 * c3 - s1 * s2 * c3 * 2.0 * y[1] / (w * w));
                let d1 = a * g * (k * c1 * s2 * c3 - s1 * s2 * c3 * 2.0 * y[0] / (w * w));
                [d2, -d1, 0.0]
            });
            GridField::from_components(grid, comps)?
        }
        Sampler::RandomSolenoidal { amplitude, seed, period, kmax } => {
            check_period(recipe, grid, period)?;
            let comps = random_lattice_field(grid.n, seed, kmax, true)?;
            let f = amplitude * s;
            let comps = comps.map(|c| c.into_iter().map(|v| T::lit(v * f)).collect());
            GridField::from_components(grid, comps)?
        }
        Sampler::RandomBandLimited { amplitude, seed, period, kmax } => {
            check_period(recipe, grid, period)?;
            let comps = random_lattice_field(grid.n, seed, kmax, false)?;
            let f = amplitude * s;
            let comps = comps.map(|c| c.into_iter().map(|v| T::lit(v * f)).collect());
            GridField::from_components(grid, comps)?
        }
    };
    // Solenoidal samplers are divergence-free in closed form.
    field.solenoidal = recipe.is_solenoidal();
    Ok(field.with_recipe(recipe.clone()))
}

fn check_period<T: Real>(recipe: &FieldRecipe, grid: BoxGrid<T>, period: f64) -> Result<()> {
    let want = period / recipe.scale;
    let have = grid.length.to_f64_lossy();
    if (want - have).abs() > 1e-12 * want {
        return Err(domain(format!(
            "periodic sampler needs box length {want}, grid has {have}"
        )));
    }
    Ok(())
}

/// `ψ(z)` of the example family (unscaled).
pub fn paper_psi(z: [f64; 3], smoothing: f64) -> [f64; 3] {
    let r = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
    if r <= 1.0 || r >= 2.0 {
        return [0.0; 3];
    }
    // φ(r) = s(2 - r), so φ'(r) = -s'(2 - r)
    let dphi = -smoothstep_deriv(2.0 - r, smoothing) / r;
    let d = z.map(|c| c * dphi);
    [d[2], -d[2], d[1] - d[0]]
}

/// Radial bump `φ(r) = s(2 - r)` of the example family.
pub fn paper_phi(r: f64, smoothing: f64) -> f64 {
    smoothstep(2.0 - r, smoothing)
}

/// Random trigonometric polynomial on the unit lattice `|m| <= kmax`, sampled
/// on `n^3` nodes of one period starting at `-period/2`. Coefficients depend
/// only on the seed and `kmax`, so every resolution samples the same field.
fn random_lattice_field(n: usize, seed: u64, kmax: f64, solenoidal: bool) -> Result<[Vec<f64>; 3]> {
    let kint = kmax.floor() as i64;
    if 2 * kint >= n as i64 {
        return Err(domain(format!(
            "kmax = {kmax} is not resolved by {n} points per axis"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let len = n * n * n;
    let wrap = |m: i64| -> usize { m.rem_euclid(n as i64) as usize };
    let mut spec: [Vec<C<f64>>; 3] = std::array::from_fn(|_| vec![Complex::default(); len]);
    let mut power = 0.0;
    for m3 in -kint..=kint {
        for m2 in -kint..=kint {
            for m1 in -kint..=kint {
                let m = [m1, m2, m3];
                let mm = (m1 * m1 + m2 * m2 + m3 * m3) as f64;
                if mm > kmax * kmax {
                    continue;
                }
                let positive = m3 > 0 || (m3 == 0 && (m2 > 0 || (m2 == 0 && m1 >= 0)));
                if !positive || (solenoidal && mm == 0.0) {
                    continue;
                }
                let draw: [C<f64>; 3] = std::array::from_fn(|_| Complex::new(normal(), normal()));
                let mut coef = if solenoidal {
                    // i m × a
                    let a = draw;
                    let mf = m.map(|v| v as f64);
                    let cross = [
                        a[2] * mf[1] - a[1] * mf[2],
                        a[0] * mf[2] - a[2] * mf[0],
                        a[1] * mf[0] - a[0] * mf[1],
                    ];
                    cross.map(|c| c * Complex::new(0.0, 1.0) / mm.sqrt())
                } else {
                    draw
                };
                if mm == 0.0 {
                    coef = coef.map(|c| Complex::new(c.re, 0.0));
                }
                // samples start at -period/2: phase e^{-iπ(m1+m2+m3)}
                let sign = if (m1 + m2 + m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let idx = wrap(m1) + n * (wrap(m2) + n * wrap(m3));
                let mirror = wrap(-m1) + n * (wrap(-m2) + n * wrap(-m3));
                for c in 0..3 {
                    let v = coef[c] * sign;
                    spec[c][idx] = v;
                    spec[c][mirror] = v.conj();
                    power += if mm == 0.0 { v.norm_sqr() } else { 2.0 * v.norm_sqr() };
                }
            }
        }
    }
    let norm = if power > 0.0 { 1.0 / power.sqrt() } else { 0.0 };
    let fft = Fft3::<f64>::new(n);
    let scale = len as f64 * norm;
    let comps = fft.inverse3(&spec);
    Ok(comps.map(|c| c.into_iter().map(|v| v * scale).collect()))
}

/// Samples `λ · recipe(λ x)` on the grid shrunk by `1/λ`.
pub fn rescale<T: Real>(recipe: &FieldRecipe, grid: BoxGrid<T>, lambda: f64) -> Result<GridField<T>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(format!("lambda = {lambda} must be positive")));
    }
    sample_analytic(&recipe.rescaled(lambda), grid.rescaled(T::lit(lambda))?)
}

/// Samples the example family `λ ψ(αλx)`.
pub fn paper_example<T: Real>(alpha: f64, lambda: f64, smoothing: f64, grid: BoxGrid<T>) -> Result<GridField<T>> {
    sample_analytic(
        &FieldRecipe::new(Sampler::PaperExample { alpha, lambda, smoothing }),
        grid,
    )
}

/// `ln Q^p_q = (2p/(p-3)) ln‖u‖_p + (2q/(3-q)) ln‖u‖_q`, `-∞` for zero data.
pub fn ln_q_pair_from_norms<T: Real>(
    p: LebesgueExponent<T>,
    q: LebesgueExponent<T>,
    norm_p: T,
    norm_q: T,
) -> Result<T> {
    let p = p.check_p_role()?;
    let q = q.check_q_role()?;
    if norm_p == T::zero() || norm_q == T::zero() {
        return Ok(T::neg_infinity());
    }
    Ok(p.p_pair_exponent() * norm_p.ln() + q.q_pair_exponent() * norm_q.ln())
}

/// Scaling-invariant norm pair `Q^p_q(u) = ‖u‖_p^{2p/(p-3)} ‖u‖_q^{2q/(3-q)}`.
pub fn q_pair<T: Real>(field: &GridField<T>, p: LebesgueExponent<T>, q: LebesgueExponent<T>) -> Result<T> {
    ln_q_pair_from_norms(p, q, field.norm(p), field.norm(q)).map(T::exp)
}

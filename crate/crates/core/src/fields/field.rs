use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::constants::LebesgueExponent;
use crate::error::{domain, Result};
use crate::fields::{BoxGrid, FieldRecipe};
use crate::real::{pairwise_sum_by, Real};
use crate::spectral::{Fft3, Wavenumbers, C};

/// Velocity field sampled on a [`BoxGrid`], components stored x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<T> {
    pub grid: BoxGrid<T>,
    pub components: [Vec<T>; 3],
    /// How the samples were produced, if they came from a recipe.
    pub recipe: Option<FieldRecipe>,
    /// Set once the field has been projected onto divergence-free fields.
    pub solenoidal: bool,
}

/// `‖u‖_{L^p}` of a sampled field with its quadrature record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NormReport<T> {
    pub p: LebesgueExponent<T>,
    pub value: T,
    pub quadrature: String,
    pub tail_note: String,
}

pub const NORM_QUADRATURE: &str = "node riemann sum, euclidean pointwise magnitude";

impl<T: Real> GridField<T> {
    pub fn zeros(grid: BoxGrid<T>) -> Self {
        let len = grid.len();
        Self {
            grid,
            components: [vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]],
            recipe: None,
            solenoidal: true,
        }
    }

    pub fn from_components(grid: BoxGrid<T>, components: [Vec<T>; 3]) -> Result<Self> {
        for c in &components {
            if c.len() != grid.len() {
                return Err(domain(format!(
                    "component has {} samples, grid needs {}",
                    c.len(),
                    grid.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(domain("field contains non-finite samples"));
            }
        }
        Ok(Self {
            grid,
            components,
            recipe: None,
            solenoidal: false,
        })
    }

    pub fn with_recipe(mut self, recipe: FieldRecipe) -> Self {
        self.recipe = Some(recipe);
        self
    }

    #[inline]
    pub fn magnitude(&self, idx: usize) -> T {
        let [a, b, c] = &self.components;
        (a[idx] * a[idx] + b[idx] * b[idx] + c[idx] * c[idx]).sqrt()
    }

    pub fn max_magnitude(&self) -> T {
        (0..self.grid.len()).fold(T::zero(), |m, i| m.max(self.magnitude(i)))
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.iter().all(|v| *v == T::zero()))
    }

    /// `‖u‖_{L^p}` as a bare number.
    pub fn norm(&self, p: LebesgueExponent<T>) -> T {
        let max = self.max_magnitude();
        match p {
            LebesgueExponent::Infinity => max,
            LebesgueExponent::Finite(pv) => {
                if max == T::zero() {
                    return T::zero();
                }
                let sum = pairwise_sum_by(self.grid.len(), &|i| (self.magnitude(i) / max).powf(pv));
                max * (sum * self.grid.cell_volume()).powf(pv.recip())
            }
        }
    }

    /// Several norms from one pass over the magnitudes.
    pub fn norms(&self, ps: &[LebesgueExponent<T>]) -> Vec<T> {
        let mags: Vec<T> = (0..self.grid.len()).map(|i| self.magnitude(i)).collect();
        let max = mags.iter().fold(T::zero(), |m, v| m.max(*v));
        ps.iter()
            .map(|p| match *p {
                LebesgueExponent::Infinity => max,
                _ if max == T::zero() => T::zero(),
                LebesgueExponent::Finite(pv) => {
                    let sum = pairwise_sum_by(mags.len(), &|i| (mags[i] / max).powf(pv));
                    max * (sum * self.grid.cell_volume()).powf(pv.recip())
                }
            })
            .collect()
    }

    pub fn lp_norm(&self, p: LebesgueExponent<T>) -> NormReport<T> {
        NormReport {
            p,
            value: self.norm(p),
            quadrature: NORM_QUADRATURE.to_string(),
            tail_note: self.tail_note(),
        }
    }

    /// Largest magnitude on the three faces `x_i = -L/2`.
    pub fn boundary_max(&self) -> T {
        let n = self.grid.n;
        let mut m = T::zero();
        for a in 0..n {
            for b in 0..n {
                for idx in [a + n * b, a + n * n * b, n * (a + n * b)] {
                    m = m.max(self.magnitude(idx));
                }
            }
        }
        m
    }

    pub fn tail_note(&self) -> String {
        let max = self.max_magnitude();
        let edge = self.boundary_max();
        if max == T::zero() {
            "identically zero".to_string()
        } else if edge == T::zero() {
            "vanishes on the box faces (compact support inside the box)".to_string()
        } else {
            format!(
                "box-face magnitude is {:.3e} of the maximum",
                (edge / max).to_f64_lossy()
            )
        }
    }

    /// Riemann sums `Σ u_i h^3` per component.
    pub fn integrals(&self) -> [T; 3] {
        let dv = self.grid.cell_volume();
        std::array::from_fn(|c| {
            let v = &self.components[c];
            pairwise_sum_by(v.len(), &|i| v[i]) * dv
        })
    }

    /// `max |ξ·û| / max |ξ||û|` over the discrete spectrum.
    pub fn divergence_residual(&self, fft: &Fft3<T>) -> T {
        let spec = fft.forward3(&self.components);
        spectral_divergence_residual(&spec, &Wavenumbers::new(self.grid.n, self.grid.length))
    }

    /// Leray projection `I - ξξᵀ/|ξ|²` applied spectrally.
    pub fn leray_projected(&self, fft: &Fft3<T>) -> Self {
        let mut spec = fft.forward3(&self.components);
        leray_project(&mut spec, &Wavenumbers::new(self.grid.n, self.grid.length));
        let components = fft.inverse3(&spec);
        Self {
            grid: self.grid,
            components,
            recipe: self.recipe.clone(),
            solenoidal: true,
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for c in out.components.iter_mut() {
            for v in c.iter_mut() {
                *v = *v * s;
            }
        }
        out
    }

    /// `self - other` on the same grid.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(domain("fields live on different grids"));
        }
        let components = std::array::from_fn(|c| {
            self.components[c]
                .iter()
                .zip(&other.components[c])
                .map(|(a, b)| *a - *b)
                .collect()
        });
        Ok(Self {
            grid: self.grid,
            components,
            recipe: None,
            solenoidal: self.solenoidal && other.solenoidal,
        })
    }

    pub fn cast<U: Real>(&self) -> GridField<U> {
        GridField {
            grid: self.grid.cast(),
            components: std::array::from_fn(|c| {
                self.components[c].iter().map(|v| U::lit(v.to_f64_lossy())).collect()
            }),
            recipe: self.recipe.clone(),
            solenoidal: self.solenoidal,
        }
    }
}

/// Projects a spectrum onto divergence-free fields in place.
pub fn leray_project<T: Real>(spec: &mut [Vec<C<T>>; 3], wn: &Wavenumbers<T>) {
    let len = spec[0].len();
    for idx in 0..len {
        let (kd, _) = wn.mode(idx);
        let kk = kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2];
        if kk == T::zero() {
            // Only the mean and unpaired Nyquist modes land here; the
            // latter carry no divergence under the odd wavenumbers.
            continue;
        }
        let dot = spec[0][idx] * kd[0] + spec[1][idx] * kd[1] + spec[2][idx] * kd[2];
        let f = dot / kk;
        for c in 0..3 {
            spec[c][idx] = spec[c][idx] - f * kd[c];
        }
    }
}

pub fn spectral_divergence_residual<T: Real>(spec: &[Vec<C<T>>; 3], wn: &Wavenumbers<T>) -> T {
    let mut num = T::zero();
    let mut den = T::zero();
    for idx in 0..spec[0].len() {
        let (kd, _) = wn.mode(idx);
        let div: Complex<T> = spec[0][idx] * kd[0] + spec[1][idx] * kd[1] + spec[2][idx] * kd[2];
        num = num.max(div.norm());
        let kn = (kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2]).sqrt();
        let un = (spec[0][idx].norm_sqr() + spec[1][idx].norm_sqr() + spec[2][idx].norm_sqr()).sqrt();
        den = den.max(kn * un);
    }
    if den == T::zero() {
        T::zero()
    } else {
        num / den
    }
}

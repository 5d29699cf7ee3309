use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fields::GridField;
use crate::heatflow::kernel::{check_time, multiplier, KernelId};
use crate::real::{pairwise_sum_by, Real};
use crate::spectral::{Fft3, Wavenumbers, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FourierMultiplier,
    /// Node quadrature of the convolution integral; `G` and `G_j` only.
    DirectConvolution,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SemigroupAction<T> {
    pub kernel: KernelId,
    pub t: T,
    pub method: Method,
}

impl<T: Real> SemigroupAction<T> {
    pub fn new(kernel: KernelId, t: T, method: Method) -> Result<Self> {
        Ok(Self {
            kernel: kernel.validate()?,
            t: check_time(t)?,
            method,
        })
    }

    pub fn spectral(kernel: KernelId, t: T) -> Result<Self> {
        Self::new(kernel, t, Method::FourierMultiplier)
    }
}

/// Bound on the kernel mass that may wrap around the periodic box.
pub const WRAP_TOLERANCE: f64 = 1e-10;

/// Largest grid accepted by [`Method::DirectConvolution`].
pub const DIRECT_MAX_N: usize = 64;

/// Smallest box edge for which the mass of `G(t)` or `|G_j(t)|` beyond the
/// faces of the box centred on a point is below [`WRAP_TOLERANCE`].
///
/// Per axis that mass is at most `e^{-x²}` with `x = L/(4√t)`, so
/// `3e^{-x²} ≤ tol` suffices.
pub fn required_box_length<T: Real>(t: T) -> T {
    let x = (T::lit(3.0) / T::lit(WRAP_TOLERANCE)).ln().sqrt();
    T::lit(4.0) * t.sqrt() * x
}

/// Fails when the box cannot hold the kernel at time `t`. Periodic recipes
/// are exempt: the multiplier acts on them exactly.
pub fn check_wraparound<T: Real>(field: &GridField<T>, t: T) -> Result<()> {
    if field.recipe.as_ref().is_some_and(|r| r.is_periodic()) {
        return Ok(());
    }
    let required = required_box_length(t);
    if field.grid.length < required {
        return Err(Error::BoxTooSmall {
            required: required.to_f64_lossy(),
            actual: field.grid.length.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Multiplies each component spectrum by the kernel's multiplier.
pub fn apply_to_spectrum<T: Real>(
    kernel: KernelId,
    t: T,
    spec: &[Vec<C<T>>; 3],
    wn: &Wavenumbers<T>,
) -> [Vec<C<T>>; 3] {
    let len = spec[0].len();
    let m: Vec<C<T>> = (0..len)
        .map(|idx| {
            let (kd, k2) = wn.mode(idx);
            multiplier(kernel, t, kd, k2)
        })
        .collect();
    std::array::from_fn(|c| spec[c].iter().zip(&m).map(|(a, b)| *a * *b).collect())
}

pub fn apply_semigroup<T: Real>(action: &SemigroupAction<T>, field: &GridField<T>) -> Result<GridField<T>> {
    let kernel = action.kernel.validate()?;
    let t = check_time(action.t)?;
    check_wraparound(field, t)?;
    let components = match action.method {
        Method::FourierMultiplier => {
            let fft = Fft3::new(field.grid.n);
            let wn = Wavenumbers::new(field.grid.n, field.grid.length);
            let spec = fft.forward3(&field.components);
            fft.inverse3(&apply_to_spectrum(kernel, t, &spec, &wn))
        }
        Method::DirectConvolution => convolve_direct(kernel, t, field)?,
    };
    Ok(GridField {
        grid: field.grid,
        components,
        recipe: None,
        solenoidal: field.solenoidal && kernel == KernelId::Heat,
    })
}

/// `Σ_y K(x - y) u(y) h³` with the kernel periodized over the nearest
/// images. `G` and `G_j` factor over the axes, so the sum is taken one axis
/// at a time with periodized 1-D factors.
fn convolve_direct<T: Real>(kernel: KernelId, t: T, field: &GridField<T>) -> Result<[Vec<T>; 3]> {
    let grid = field.grid;
    let n = grid.n;
    if n > DIRECT_MAX_N {
        return Err(domain(format!(
            "direct convolution is limited to n <= {DIRECT_MAX_N}, got {n}"
        )));
    }
    let derivative_axis = match kernel {
        KernelId::Heat => None,
        KernelId::Gradient { j } => Some(j as usize - 1),
        KernelId::RieszGradient { .. } => {
            return Err(Error::UnsupportedKernel(format!(
                "{kernel} has no closed form in physical space; apply it as a Fourier multiplier"
            )))
        }
    };
    let h = grid.spacing();
    let four_t = T::lit(4.0) * t;
    let g = |x: T| (T::PI() * four_t).powf(T::lit(-0.5)) * (-x * x / four_t).exp();
    let dg = |x: T| -x / (T::lit(2.0) * t) * g(x);
    let factor = |derivative: bool| -> Vec<T> {
        (0..n)
            .map(|i| {
                let d = T::from_usize_lossy(i) * h;
                (-1i32..=1)
                    .map(|m| {
                        let x = d + T::lit(m as f64) * grid.length;
                        if derivative {
                            dg(x)
                        } else {
                            g(x)
                        }
                    })
                    .sum::<T>()
                    * h
            })
            .collect()
    };
    let factors: [Vec<T>; 3] = std::array::from_fn(|a| factor(derivative_axis == Some(a)));
    let stride = [1, n, n * n];
    let out = std::array::from_fn(|comp| {
        let mut cur = field.components[comp].clone();
        for axis in 0..3 {
            let f = &factors[axis];
            let st = stride[axis];
            let mut next = vec![T::zero(); cur.len()];
            for (idx, slot) in next.iter_mut().enumerate() {
                let i = (idx / st) % n;
                let base = idx - i * st;
                *slot = pairwise_sum_by(n, &|ip| f[(i + n - ip) % n] * cur[base + ip * st]);
            }
            cur = next;
        }
        cur
    });
    Ok(out)
}

/// Riesz transform `R_a`, multiplier `iξ_a/|ξ|`, zero at `ξ = 0`.
pub fn riesz_apply<T: Real>(axis: u8, field: &GridField<T>) -> Result<GridField<T>> {
    if !(1..=3).contains(&axis) {
        return Err(domain(format!("Riesz axis {axis} must be 1, 2 or 3")));
    }
    let fft = Fft3::new(field.grid.n);
    let wn = Wavenumbers::new(field.grid.n, field.grid.length);
    let spec = fft.forward3(&field.components);
    let out = riesz_spectrum(axis, &spec, &wn);
    Ok(GridField {
        grid: field.grid,
        components: fft.inverse3(&out),
        recipe: None,
        solenoidal: false,
    })
}

pub fn riesz_spectrum<T: Real>(axis: u8, spec: &[Vec<C<T>>; 3], wn: &Wavenumbers<T>) -> [Vec<C<T>>; 3] {
    let a = axis as usize - 1;
    let m: Vec<C<T>> = (0..spec[0].len())
        .map(|idx| {
            let (kd, _) = wn.mode(idx);
            let kk = (kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2]).sqrt();
            if kk == T::zero() {
                C::default()
            } else {
                C::new(T::zero(), kd[a] / kk)
            }
        })
        .collect();
    std::array::from_fn(|c| spec[c].iter().zip(&m).map(|(a, b)| *a * *b).collect())
}

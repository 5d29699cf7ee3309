use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::composite;
use crate::real::Real;
use crate::spectral::C;

/// One of the heat kernels. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelId {
    /// `G(t, x) = (4πt)^{-3/2} exp(-|x|²/4t)`.
    Heat,
    /// `G_j = ∂_j G`.
    Gradient { j: u8 },
    /// `G_klj = R_k R_l G_j`, defined only through its Fourier multiplier.
    RieszGradient { k: u8, l: u8, j: u8 },
}

fn check_index(i: u8) -> Result<u8> {
    if (1..=3).contains(&i) {
        Ok(i)
    } else {
        Err(domain(format!("kernel index {i} must be 1, 2 or 3")))
    }
}

impl KernelId {
    pub fn gradient(j: u8) -> Result<Self> {
        Ok(Self::Gradient { j: check_index(j)? })
    }

    pub fn riesz_gradient(k: u8, l: u8, j: u8) -> Result<Self> {
        Ok(Self::RieszGradient {
            k: check_index(k)?,
            l: check_index(l)?,
            j: check_index(j)?,
        })
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Self::Heat => Ok(self),
            Self::Gradient { j } => Self::gradient(j),
            Self::RieszGradient { k, l, j } => Self::riesz_gradient(k, l, j),
        }
    }

    pub fn gradients() -> Vec<Self> {
        (1..=3).map(|j| Self::Gradient { j }).collect()
    }

    pub fn riesz_gradients() -> Vec<Self> {
        let mut out = Vec::with_capacity(27);
        for k in 1..=3 {
            for l in 1..=3 {
                for j in 1..=3 {
                    out.push(Self::RieszGradient { k, l, j });
                }
            }
        }
        out
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Heat => write!(f, "G"),
            Self::Gradient { j } => write!(f, "G_{j}"),
            Self::RieszGradient { k, l, j } => write!(f, "G_{k}{l}{j}"),
        }
    }
}

pub(crate) fn check_time<T: Real>(t: T) -> Result<T> {
    if t > T::zero() && t.is_finite() {
        Ok(t)
    } else {
        Err(domain(format!("time t = {t} must be positive")))
    }
}

fn unsupported(kernel: KernelId) -> Error {
    Error::UnsupportedKernel(format!(
        "{kernel} has no closed form in physical space; apply it as a Fourier multiplier"
    ))
}

/// Closed-form value of `G` or `G_j` at `(t, x)`.
pub fn kernel_value<T: Real>(kernel: KernelId, t: T, x: [T; 3]) -> Result<T> {
    let t = check_time(t)?;
    let four_t = T::lit(4.0) * t;
    let g = (T::PI() * four_t).powf(T::lit(-1.5)) * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / four_t).exp();
    match kernel.validate()? {
        KernelId::Heat => Ok(g),
        KernelId::Gradient { j } => Ok(-x[j as usize - 1] / (T::lit(2.0) * t) * g),
        k @ KernelId::RieszGradient { .. } => Err(unsupported(k)),
    }
}

/// Fourier multiplier of the kernel at one mode. `kd` are the odd
/// wavenumbers (Nyquist zeroed) and `k2` the full `|k|²`.
#[inline]
pub fn multiplier<T: Real>(kernel: KernelId, t: T, kd: [T; 3], k2: T) -> C<T> {
    let heat = (-t * k2).exp();
    match kernel {
        KernelId::Heat => C::new(heat, T::zero()),
        KernelId::Gradient { j } => C::new(T::zero(), kd[j as usize - 1] * heat),
        KernelId::RieszGradient { k, l, j } => {
            let kk = kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2];
            if kk == T::zero() {
                return C::default();
            }
            // (iξ_k/|ξ|)(iξ_l/|ξ|)(iξ_j) = -i ξ_k ξ_l ξ_j/|ξ|²
            let v = kd[k as usize - 1] * kd[l as usize - 1] * kd[j as usize - 1] / kk;
            C::new(T::zero(), -v * heat)
        }
    }
}

const L1_PANELS: usize = 6;
const L1_ORDER: usize = 12;

/// `∫|K(t, x)| dx` over the box `[-X, X]^3`, `X = 12 sqrt(2t)`, by a tensor
/// Gauss-Legendre rule. Both kernels factor over the axes, so the tensor rule
/// is evaluated one axis at a time.
pub fn kernel_l1<T: Real>(kernel: KernelId, t: T) -> Result<T> {
    let t = check_time(t)?;
    let reach = T::lit(12.0) * (T::lit(2.0) * t).sqrt();
    let four_t = T::lit(4.0) * t;
    let g = |x: T| (T::PI() * four_t).powf(T::lit(-0.5)) * (-x * x / four_t).exp();
    // even integrands: twice the half line, panels split at the origin
    let plain = T::lit(2.0) * composite(g, T::zero(), reach, L1_PANELS, L1_ORDER);
    match kernel.validate()? {
        KernelId::Heat => Ok(plain * plain * plain),
        KernelId::Gradient { .. } => {
            let weighted = T::lit(2.0)
                * composite(|x| x / (T::lit(2.0) * t) * g(x), T::zero(), reach, L1_PANELS, L1_ORDER);
            Ok(weighted * plain * plain)
        }
        k @ KernelId::RieszGradient { .. } => Err(unsupported(k)),
    }
}

fn golden_max<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

/// `max_x |K(t, x)|` from a coarse scan refined by golden-section search
/// along each coordinate in turn.
pub fn kernel_sup<T: Real>(kernel: KernelId, t: T) -> Result<T> {
    let t = check_time(t)?;
    let abs = |x: [T; 3]| kernel_value(kernel, t, x).map(|v| v.abs());
    let reach = T::lit(4.0) * (T::lit(2.0) * t).sqrt();
    let points = 41;
    let step = T::lit(2.0) * reach / T::from_usize_lossy(points - 1);
    let node = |i: usize| -reach + T::from_usize_lossy(i) * step;
    let mut best = ([T::zero(); 3], T::neg_infinity());
    for i in 0..points {
        for j in 0..points {
            for k in 0..points {
                let x = [node(i), node(j), node(k)];
                let v = abs(x)?;
                if v > best.1 {
                    best = (x, v);
                }
            }
        }
    }
    let mut x = best.0;
    for _ in 0..3 {
        for axis in 0..3 {
            let line = |s: T| {
                let mut y = x;
                y[axis] = s;
                abs(y).unwrap_or(T::zero())
            };
            let s = golden_max(line, x[axis] - step, x[axis] + step);
            if line(s) >= line(x[axis]) {
                x[axis] = s;
            }
        }
    }
    abs(x)
}

use crate::error::{domain, Result};
use crate::fields::{spectral_divergence_residual, BoxGrid, GridField};
use crate::real::Real;
use crate::spectral::{frequency, Fft3, Wavenumbers, C};

pub type Spectrum<T> = [Vec<C<T>>; 3];

/// Index pairs `(a, b)` with `a <= b` of the symmetric product tensor.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

pub(crate) fn pair_index(a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    PAIRS.iter().position(|&p| p == (a, b)).expect("valid pair")
}

/// Truncated Fourier–Galerkin operators on one periodic box.
pub struct Galerkin<T: Real> {
    pub grid: BoxGrid<T>,
    pub fft: Fft3<T>,
    pub wn: Wavenumbers<T>,
    /// Modes kept by the dealiasing rule.
    pub keep: Vec<bool>,
    /// `|k|²` per mode.
    pub k2: Vec<T>,
    /// Parseval weight turning `Σ|û|²` into `∫|u|²`.
    pub parseval: T,
    /// Grid of twice the resolution on which products are formed when
    /// padding replaces the truncation rule.
    pad: Option<Box<Galerkin<T>>>,
}

impl<T: Real> Galerkin<T> {
    /// `dealias` is the kept fraction of each axis band: a mode survives
    /// when every `|frequency| < dealias · n/2`.
    pub fn new(grid: BoxGrid<T>, dealias: f64) -> Result<Self> {
        if !(dealias > 0.0 && dealias <= 1.0) {
            return Err(domain(format!("dealias fraction {dealias} must lie in (0, 1]")));
        }
        let n = grid.n;
        let cut = dealias * n as f64 / 2.0;
        let axis_keep: Vec<bool> = (0..n).map(|i| (frequency(i, n).abs() as f64) < cut).collect();
        let wn = Wavenumbers::new(n, grid.length);
        let len = grid.len();
        let keep = (0..len)
            .map(|idx| axis_keep[idx % n] && axis_keep[(idx / n) % n] && axis_keep[idx / (n * n)])
            .collect();
        let k2 = (0..len).map(|idx| wn.mode(idx).1).collect();
        let nn = T::from_usize_lossy(len);
        Ok(Self {
            grid,
            fft: Fft3::new(n),
            wn,
            keep,
            k2,
            parseval: grid.length * grid.length * grid.length / (nn * nn),
            pad: None,
        })
    }

    /// Keeps every mode below the Nyquist frequency and forms products on a
    /// `2n` grid, which holds their full band without aliasing.
    pub fn padded(grid: BoxGrid<T>) -> Result<Self> {
        let fine = Self::new(BoxGrid::new(2 * grid.n, grid.length)?, 1.0)?;
        Ok(Self {
            pad: Some(Box::new(fine)),
            ..Self::new(grid, 1.0)?
        })
    }

    pub fn is_padded(&self) -> bool {
        self.pad.is_some()
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn forward(&self, field: &GridField<T>) -> Result<Spectrum<T>> {
        if field.grid != self.grid {
            return Err(domain("field grid differs from the solver grid"));
        }
        Ok(self.fft.forward3(&field.components))
    }

    pub fn to_field(&self, spec: &Spectrum<T>) -> GridField<T> {
        let mut f = GridField::zeros(self.grid);
        f.components = self.fft.inverse3(spec);
        f.solenoidal = true;
        f
    }

    pub fn project(&self, spec: &mut Spectrum<T>) {
        crate::fields::leray_project(spec, &self.wn);
    }

    pub fn divergence_residual(&self, spec: &Spectrum<T>) -> T {
        spectral_divergence_residual(spec, &self.wn)
    }

    /// `∫|u|²` from the spectrum.
    pub fn energy(&self, spec: &Spectrum<T>) -> T {
        let mut s = T::zero();
        for c in spec {
            for z in c {
                s = s + z.norm_sqr();
            }
        }
        s * self.parseval
    }

    /// `∫|∇u|²` from the spectrum.
    pub fn dissipation(&self, spec: &Spectrum<T>) -> T {
        let mut s = T::zero();
        for c in spec {
            for (z, k2) in c.iter().zip(&self.k2) {
                s = s + *k2 * z.norm_sqr();
            }
        }
        s * self.parseval
    }

    /// `d/dt ∫|∇u|²` given `û` and `∂_t û`.
    pub fn dissipation_rate(&self, spec: &Spectrum<T>, dt_spec: &Spectrum<T>) -> T {
        let mut s = T::zero();
        for c in 0..3 {
            for idx in 0..self.len() {
                s = s + self.k2[idx] * (spec[c][idx].conj() * dt_spec[c][idx]).re;
            }
        }
        T::lit(2.0) * s * self.parseval
    }

    /// Spectra of the six products `u_a u_b` of the dealiased field, and the
    /// largest pointwise speed of that field.
    pub fn product_spectra(&self, spec: &Spectrum<T>) -> ([Vec<C<T>>; 6], T) {
        let masked: Spectrum<T> = std::array::from_fn(|c| {
            spec[c]
                .iter()
                .zip(&self.keep)
                .map(|(z, &k)| if k { *z } else { C::default() })
                .collect()
        });
        let (u, work) = match &self.pad {
            Some(fine) => (fine.fft.inverse3(&fine.embed(&masked, self.grid.n)), fine.as_ref()),
            None => (self.fft.inverse3(&masked), self),
        };
        let mut speed = T::zero();
        for i in 0..work.len() {
            speed = speed.max((u[0][i] * u[0][i] + u[1][i] * u[1][i] + u[2][i] * u[2][i]).sqrt());
        }
        let prod = |a: usize, b: usize| -> Vec<T> { u[a].iter().zip(&u[b]).map(|(x, y)| *x * *y).collect() };
        let (f00, f01) = work.fft.forward_pair(&prod(0, 0), &prod(0, 1));
        let (f02, f11) = work.fft.forward_pair(&prod(0, 2), &prod(1, 1));
        let (f12, f22) = work.fft.forward_pair(&prod(1, 2), &prod(2, 2));
        let s = [f00, f01, f02, f11, f12, f22];
        match &self.pad {
            Some(fine) => (self.embed_all(&s, fine.grid.n), speed),
            None => (s, speed),
        }
    }

    /// `-P ∇·S` restricted to the kept modes, for a symmetric tensor `S`
    /// given by its six independent spectra.
    pub fn divergence_term(&self, s: &[Vec<C<T>>; 6]) -> Spectrum<T> {
        let len = self.len();
        let mut out: Spectrum<T> = std::array::from_fn(|_| vec![C::default(); len]);
        for idx in 0..len {
            if !self.keep[idx] {
                continue;
            }
            let (kd, _) = self.wn.mode(idx);
            let mut w = [C::default(); 3];
            for j in 0..3 {
                let mut acc: C<T> = C::default();
                for m in 0..3 {
                    acc = acc + s[pair_index(m, j)][idx] * kd[m];
                }
                // -i k_m S_mj
                w[j] = C::new(acc.im, -acc.re);
            }
            let kk = kd[0] * kd[0] + kd[1] * kd[1] + kd[2] * kd[2];
            if kk > T::zero() {
                let dot = (w[0] * kd[0] + w[1] * kd[1] + w[2] * kd[2]) / kk;
                for j in 0..3 {
                    w[j] = w[j] - dot * kd[j];
                }
            }
            for j in 0..3 {
                out[j][idx] = w[j];
            }
        }
        out
    }

    /// The nonlinear term `-P ∇·(u ⊗ u)` and the largest speed.
    pub fn nonlinear(&self, spec: &Spectrum<T>) -> (Spectrum<T>, T) {
        let (s, speed) = self.product_spectra(spec);
        (self.divergence_term(&s), speed)
    }

    /// `e^{-t|k|²} û`.
    pub fn heat(&self, t: T, spec: &Spectrum<T>) -> Spectrum<T> {
        let e: Vec<T> = self.k2.iter().map(|k2| (-t * *k2).exp()).collect();
        std::array::from_fn(|c| spec[c].iter().zip(&e).map(|(z, f)| *z * *f).collect())
    }

    /// Resamples a field onto this grid by truncating or zero-padding its
    /// spectrum. Both grids must share the box length.
    pub fn resample(&self, field: &GridField<T>) -> Result<GridField<T>> {
        if field.grid.length != self.grid.length {
            return Err(domain("spectral resampling needs the same box length"));
        }
        let src = Fft3::new(field.grid.n).forward3(&field.components);
        let mut f = self.to_field(&self.embed(&src, field.grid.n));
        f.recipe = field.recipe.clone();
        f.solenoidal = field.solenoidal;
        Ok(f)
    }

    /// Moves a spectrum from an `n0`-grid onto this grid, keeping the modes
    /// both grids share.
    pub fn embed(&self, src: &Spectrum<T>, n0: usize) -> Spectrum<T> {
        self.embed_all(src, n0)
    }

    fn embed_all<const K: usize>(&self, src: &[Vec<C<T>>; K], n0: usize) -> [Vec<C<T>>; K] {
        let n1 = self.grid.n;
        let scale = T::from_usize_lossy(self.len()) / T::from_usize_lossy(n0 * n0 * n0);
        let half = n0.min(n1) / 2;
        let map = |i: usize| -> Option<usize> {
            let f = frequency(i, n0);
            // the unpaired Nyquist mode of the smaller grid is dropped
            if f.unsigned_abs() as usize >= half {
                return None;
            }
            Some(if f >= 0 { f as usize } else { (n1 as i64 + f) as usize })
        };
        let mut dst: [Vec<C<T>>; K] = std::array::from_fn(|_| vec![C::default(); self.len()]);
        for idx in 0..n0 * n0 * n0 {
            let (i, j, k) = (idx % n0, (idx / n0) % n0, idx / (n0 * n0));
            if let (Some(a), Some(b), Some(c)) = (map(i), map(j), map(k)) {
                let out = a + n1 * (b + n1 * c);
                for comp in 0..K {
                    dst[comp][out] = src[comp][idx] * scale;
                }
            }
        }
        dst
    }
}

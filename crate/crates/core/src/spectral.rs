//! Three-dimensional FFTs on `n^3` arrays stored x-fastest
//! (`index = i + n*(j + n*k)`), plus the periodic wavenumber tables.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::real::Real;

pub type C<T> = Complex<T>;

#[derive(Clone)]
pub struct Fft3<T: Real> {
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Fft3<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl<T: Real> Fft3<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn run(&self, plan: &Arc<dyn Fft<T>>, data: &mut [C<T>]) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "array does not match the FFT size");
        let mut scratch = vec![C::default(); plan.get_inplace_scratch_len()];
        // x lines are contiguous
        plan.process_with_scratch(data, &mut scratch);
        // y lines: transpose each z-slab
        let mut slab = vec![C::default(); n * n];
        for k in 0..n {
            let s = &mut data[k * n * n..(k + 1) * n * n];
            for j in 0..n {
                for i in 0..n {
                    slab[j + n * i] = s[i + n * j];
                }
            }
            plan.process_with_scratch(&mut slab, &mut scratch);
            for j in 0..n {
                for i in 0..n {
                    s[i + n * j] = slab[j + n * i];
                }
            }
        }
        // z lines: gather one xz-plane at a time
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    slab[k + n * i] = data[i + n * (j + n * k)];
                }
            }
            plan.process_with_scratch(&mut slab, &mut scratch);
            for k in 0..n {
                for i in 0..n {
                    data[i + n * (j + n * k)] = slab[k + n * i];
                }
            }
        }
    }

    /// Unnormalized forward transform, `Σ_x f(x) e^{-i k·x}`.
    pub fn forward(&self, data: &mut [C<T>]) {
        self.run(&self.fwd, data);
    }

    /// Inverse transform including the `1/n^3` factor.
    pub fn inverse(&self, data: &mut [C<T>]) {
        self.run(&self.inv, data);
        let s = T::one() / T::from_usize_lossy(self.len());
        for z in data.iter_mut() {
            *z = *z * s;
        }
    }

    /// Index of the mode `-k` for the mode stored at `idx`.
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.n;
        let (i, j, k) = (idx % n, (idx / n) % n, idx / (n * n));
        let m = |a: usize| (n - a) % n;
        m(i) + n * (m(j) + n * m(k))
    }

    /// Forward transforms of two real arrays with a single complex FFT.
    pub fn forward_pair(&self, a: &[T], b: &[T]) -> (Vec<C<T>>, Vec<C<T>>) {
        let mut z: Vec<C<T>> = a.iter().zip(b).map(|(&x, &y)| C::new(x, y)).collect();
        self.forward(&mut z);
        let half = T::lit(0.5);
        let mut fa = vec![C::default(); z.len()];
        let mut fb = vec![C::default(); z.len()];
        for idx in 0..z.len() {
            let zm = z[self.mirror(idx)].conj();
            fa[idx] = (z[idx] + zm) * half;
            let d = (z[idx] - zm) * half;
            fb[idx] = C::new(d.im, -d.re);
        }
        (fa, fb)
    }

    pub fn forward_real(&self, a: &[T]) -> Vec<C<T>> {
        let mut z: Vec<C<T>> = a.iter().map(|&x| C::new(x, T::zero())).collect();
        self.forward(&mut z);
        z
    }

    /// Inverse transforms of two Hermitian spectra with a single complex FFT.
    /// Non-Hermitian parts are discarded.
    pub fn inverse_pair(&self, fa: &[C<T>], fb: &[C<T>]) -> (Vec<T>, Vec<T>) {
        let mut z: Vec<C<T>> = fa
            .iter()
            .zip(fb)
            .map(|(&x, &y)| x + C::new(-y.im, y.re))
            .collect();
        self.inverse(&mut z);
        (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
    }

    pub fn inverse_real(&self, fa: &[C<T>]) -> Vec<T> {
        let mut z = fa.to_vec();
        self.inverse(&mut z);
        z.into_iter().map(|c| c.re).collect()
    }

    /// Forward transforms of three real components using two FFTs.
    pub fn forward3(&self, u: &[Vec<T>; 3]) -> [Vec<C<T>>; 3] {
        let (a, b) = self.forward_pair(&u[0], &u[1]);
        let c = self.forward_real(&u[2]);
        [a, b, c]
    }

    /// Inverse transforms of three Hermitian spectra using two FFTs.
    pub fn inverse3(&self, f: &[Vec<C<T>>; 3]) -> [Vec<T>; 3] {
        let (a, b) = self.inverse_pair(&f[0], &f[1]);
        let c = self.inverse_real(&f[2]);
        [a, b, c]
    }
}

/// Signed integer frequency of FFT index `i`: `0, 1, ..., n/2 - 1, -n/2, ..., -1`.
pub fn frequency(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Wavenumbers of a periodic box of edge `length`.
///
/// `full` is used for even multipliers such as `|k|^2`. `odd` has the
/// unpaired Nyquist entry zeroed; it is used for every multiplier that is odd
/// in a coordinate so that real fields stay real.
#[derive(Clone, Debug)]
pub struct Wavenumbers<T> {
    pub full: Vec<T>,
    pub odd: Vec<T>,
}

impl<T: Real> Wavenumbers<T> {
    pub fn new(n: usize, length: T) -> Self {
        let dk = T::lit(2.0) * T::PI() / length;
        let full: Vec<T> = (0..n)
            .map(|i| T::lit(frequency(i, n) as f64) * dk)
            .collect();
        let mut odd = full.clone();
        if n % 2 == 0 {
            odd[n / 2] = T::zero();
        }
        Self { full, odd }
    }

    /// `(odd wavevector, |full|^2)` of the mode at flat index `idx`.
    #[inline]
    pub fn mode(&self, idx: usize) -> ([T; 3], T) {
        let n = self.full.len();
        let (i, j, k) = (idx % n, (idx / n) % n, idx / (n * n));
        let kd = [self.odd[i], self.odd[j], self.odd[k]];
        let k2 = self.full[i] * self.full[i] + self.full[j] * self.full[j] + self.full[k] * self.full[k];
        (kd, k2)
    }
}

//! Gauss-Legendre quadrature.

use std::f64::consts::PI;

use crate::real::Real;

/// Nodes and weights of the `order`-point rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let legendre = |z: f64| {
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=order {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = order as f64 * (z * p1 - p0) / (z * z - 1.0);
        (p1, dp)
    };
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for i in 0..order {
        let mut z = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(z);
        nodes.push(z);
        weights.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (nodes, weights)
}

/// Composite rule with `panels` equal panels of `order` points on `[a, b]`.
pub fn composite<T: Real>(f: impl Fn(T) -> T, a: T, b: T, panels: usize, order: usize) -> T {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / T::from_usize_lossy(panels);
    let half = T::lit(0.5);
    let mut total = T::zero();
    for k in 0..panels {
        let lo = a + T::from_usize_lossy(k) * h;
        let panel: T = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| T::lit(wi) * f(lo + half * h * (T::lit(xi) + T::one())))
            .sum();
        total = total + panel * half * h;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (_, w) = gauss_legendre(12);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let v = composite(|x: f64| x.powi(23), 0.0, 1.0, 1, 12);
        assert!((v - 1.0 / 24.0).abs() < 1e-15);
        let v = composite(|x: f64| x.exp(), 0.0, 3.0, 4, 12);
        assert!((v - (3f64.exp() - 1.0)).abs() < 1e-13);
    }
}

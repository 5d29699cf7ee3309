//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Composite Gauss-Legendre on [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(lo + 0.5 * h * (xi + 1.0)) * 0.5 * h;
        }
    }
    s
}

/// Derivative of the exponential smoothstep, written out from scratch.
pub fn smoothstep_prime(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let f = |t: f64| (-1.0 / t).exp();
    let fp = |t: f64| (-1.0 / t).exp() / (t * t);
    let (a, b) = (f(x), f(1.0 - x));
    let (da, db) = (fp(x), -fp(1.0 - x));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

/// `‖ψ‖_{L^p}` of the unscaled example field by separation into a radial
/// integral and a spherical integral.
pub fn paper_psi_norm(p: f64) -> f64 {
    // |ψ(z)| = |φ'(r)| sqrt(2 ω₃² + (ω₂ - ω₁)²)
    let radial = integrate(|r| smoothstep_prime(2.0 - r).abs().powf(p) * r * r, 1.0, 2.0, 64, 16);
    let n_phi = 256;
    let angular = integrate(
        |c| {
            let s = (1.0 - c * c).sqrt();
            let mut acc = 0.0;
            for k in 0..n_phi {
                let ph = 2.0 * PI * k as f64 / n_phi as f64;
                let (w1, w2, w3) = (s * ph.cos(), s * ph.sin(), c);
                acc += (2.0 * w3 * w3 + (w2 - w1) * (w2 - w1)).powf(p / 2.0);
            }
            acc * 2.0 * PI / n_phi as f64
        },
        -1.0,
        1.0,
        16,
        16,
    );
    (radial * angular).powf(1.0 / p)
}

/// Sup of `|ψ|`, the product of the radial and angular maxima.
pub fn paper_psi_sup() -> f64 {
    let mut rmax = 0.0f64;
    for i in 0..=200_000 {
        let r = 1.0 + i as f64 / 200_000.0;
        rmax = rmax.max(smoothstep_prime(2.0 - r).abs());
    }
    // max over the sphere of sqrt(2ω₃² + (ω₂-ω₁)²) is the top eigenvalue of
    // [[1,-1,0],[-1,1,0],[0,0,2]], which is 2, so the factor is √2.
    rmax * 2f64.sqrt()
}

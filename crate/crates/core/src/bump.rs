//! Smooth transition `s(x)` built from `f(x) = exp(-σ/x)`:
//! `s = f(x)/(f(x) + f(1-x))`, equal to 0 for `x <= 0` and 1 for `x >= 1`.

use crate::real::Real;

pub fn smoothstep<T: Real>(x: T, sigma: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else if x >= T::one() {
        T::one()
    } else {
        let a = sigma / x - sigma / (T::one() - x);
        T::one() / (T::one() + a.exp())
    }
}

pub fn smoothstep_deriv<T: Real>(x: T, sigma: T) -> T {
    if x <= T::zero() || x >= T::one() {
        T::zero()
    } else {
        let s = smoothstep(x, sigma);
        let y = T::one() - x;
        s * (T::one() - s) * sigma * (T::one() / (x * x) + T::one() / (y * y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_symmetry() {
        assert_eq!(smoothstep(0.0, 1.0), 0.0);
        assert_eq!(smoothstep(1.0, 1.0), 1.0);
        assert!((smoothstep(0.5f64, 1.0) - 0.5).abs() < 1e-15);
        for x in [0.1, 0.3, 0.45] {
            assert!((smoothstep::<f64>(x, 1.0) + smoothstep(1.0 - x, 1.0) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for x in [0.05, 0.2, 0.5, 0.8, 0.97] {
            let h = 1e-6;
            let fd = (smoothstep(x + h, 1.3) - smoothstep(x - h, 1.3)) / (2.0 * h);
            assert!((fd - smoothstep_deriv::<f64>(x, 1.3)).abs() < 1e-7, "x = {x}");
        }
    }
}

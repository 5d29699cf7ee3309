use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{domain, Result};
use crate::real::Real;

/// A Lebesgue exponent in `[1, ∞]` with an explicit infinity.
///
/// Every exponent-dependent quantity is written in terms of the reciprocal
/// `r = 1/p`, so the value at `p = ∞` is the analytic limit `r = 0` rather
/// than a large float plugged into the finite formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LebesgueExponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> LebesgueExponent<T> {
    /// Any exponent in `[1, ∞]`. A float infinity maps to [`Self::Infinity`].
    pub fn new(value: T) -> Result<Self> {
        if value.is_nan() {
            return Err(domain("exponent is NaN"));
        }
        if value.is_infinite() && value > T::zero() {
            return Ok(Self::Infinity);
        }
        if value < T::one() {
            return Err(domain(format!("exponent {value} is below 1")));
        }
        Ok(Self::Finite(value))
    }

    pub fn infinity() -> Self {
        Self::Infinity
    }

    /// Exponent in the spatial-integrability role, `p ∈ (3, ∞]`.
    pub fn p_role(value: T) -> Result<Self> {
        Self::new(value)?.check_p_role()
    }

    /// Exponent in the low-integrability role, `q ∈ [1, 3)`.
    pub fn q_role(value: T) -> Result<Self> {
        Self::new(value)?.check_q_role()
    }

    pub fn check_p_role(self) -> Result<Self> {
        match self {
            Self::Finite(p) if p <= T::lit(3.0) => {
                Err(domain(format!("p = {p} must lie in (3, inf]")))
            }
            _ => Ok(self),
        }
    }

    pub fn check_q_role(self) -> Result<Self> {
        match self {
            Self::Finite(q) if q >= T::one() && q < T::lit(3.0) => Ok(self),
            _ => Err(domain(format!("q = {self} must lie in [1, 3)"))),
        }
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinity)
    }

    /// `1/p`, zero at infinity.
    pub fn recip(self) -> T {
        match self {
            Self::Finite(v) => v.recip(),
            Self::Infinity => T::zero(),
        }
    }

    /// `(p - 3)/(2p)`, tending to `1/2`.
    pub fn half_excess(self) -> T {
        (T::one() - T::lit(3.0) * self.recip()) / T::lit(2.0)
    }

    /// `2p/(p - 3)`, tending to `2`.
    pub fn p_pair_exponent(self) -> T {
        T::lit(2.0) / (T::one() - T::lit(3.0) * self.recip())
    }

    /// `2q/(3 - q)`; infinite when `q` is.
    pub fn q_pair_exponent(self) -> T {
        match self {
            Self::Finite(q) => T::lit(2.0) * q / (T::lit(3.0) - q),
            Self::Infinity => T::infinity(),
        }
    }

    /// `(3 - q)/(2q)`, the time exponent attached to an `L^q` norm.
    pub fn q_time_exponent(self) -> T {
        (T::lit(3.0) * self.recip() - T::one()) / T::lit(2.0)
    }

    /// Hölder conjugate `p/(p-1)`.
    pub fn conjugate(self) -> Self {
        match self {
            Self::Infinity => Self::Finite(T::one()),
            Self::Finite(v) if v == T::one() => Self::Infinity,
            Self::Finite(v) => Self::Finite(v / (v - T::one())),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Self::Finite(v) => v.to_f64_lossy(),
            Self::Infinity => f64::INFINITY,
        }
    }

    pub fn cast<U: Real>(self) -> LebesgueExponent<U> {
        match self {
            Self::Finite(v) => LebesgueExponent::Finite(U::lit(v.to_f64_lossy())),
            Self::Infinity => LebesgueExponent::Infinity,
        }
    }
}

impl<T: Real> PartialOrd for LebesgueExponent<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Self::Infinity, Self::Infinity) => Some(Ordering::Equal),
            (Self::Infinity, _) => Some(Ordering::Greater),
            (_, Self::Infinity) => Some(Ordering::Less),
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<T: Real> fmt::Display for LebesgueExponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl<T: Real> Serialize for LebesgueExponent<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(v.to_f64_lossy()),
            Self::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Real> Deserialize<'de> for LebesgueExponent<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);

        impl<T: Real> Visitor<'_> for V<T> {
            type Value = LebesgueExponent<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                LebesgueExponent::new(T::lit(v)).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v.trim().to_ascii_lowercase().as_str() {
                    "inf" | "infinity" | "∞" => Ok(LebesgueExponent::Infinity),
                    other => other
                        .parse::<f64>()
                        .map_err(E::custom)
                        .and_then(|x| self.visit_f64(x)),
                }
            }
        }

        d.deserialize_any(V(std::marker::PhantomData))
    }
}

//! Closed-form kernel constants and thresholds.
//!
//! Every evaluator accumulates a natural logarithm and exponentiates once at
//! the end. Exponents are expressed through `r = 1/p` and `s = 1/q`, so
//! `p = ∞` is the exact limit `r = 0`.

use crate::constants::LebesgueExponent;
use crate::error::{domain, Result};
use crate::real::Real;

type Exp<T> = LebesgueExponent<T>;

fn ln2<T: Real>() -> T {
    T::LN_2()
}

fn ln_pi<T: Real>() -> T {
    T::PI().ln()
}

fn ln_4pi<T: Real>() -> T {
    (T::lit(4.0) * T::PI()).ln()
}

fn half<T: Real>() -> T {
    T::lit(0.5)
}

fn check_c_infty<T: Real>(c_infty: T) -> Result<()> {
    if c_infty.is_finite() && c_infty >= T::zero() {
        Ok(())
    } else {
        Err(domain(format!("C_inf = {c_infty} must be finite and nonnegative")))
    }
}

/// `c^e` with the convention `0^0 = 1`, as a logarithm.
fn ln_pow<T: Real>(c: T, e: T) -> T {
    if e == T::zero() {
        T::zero()
    } else {
        e * c.ln()
    }
}

/// Checks `1 <= q < p <= ∞` with `q` finite and returns `(r, s) = (1/p, 1/q)`.
fn ordered_pair<T: Real>(p: Exp<T>, q: Exp<T>) -> Result<(T, T)> {
    let qv = q
        .finite()
        .ok_or_else(|| domain("the lower exponent must be finite"))?;
    if qv < T::one() {
        return Err(domain(format!("q = {qv} is below 1")));
    }
    if p <= q {
        return Err(domain(format!("need q < p, got p = {p}, q = {q}")));
    }
    Ok((p.recip(), qv.recip()))
}

pub fn ln_c0<T: Real>(p: Exp<T>, q: Exp<T>) -> Result<T> {
    let (r, s) = ordered_pair(p, q)?;
    Ok(-T::lit(1.5) * (s - r) * ln_4pi::<T>())
}

/// `C_0(p, q) = (4π)^{-3(p-q)/(2pq)}`, the `L^q → L^p` heat kernel constant.
pub fn c0<T: Real>(p: Exp<T>, q: Exp<T>) -> Result<T> {
    ln_c0(p, q).map(T::exp)
}

fn ln_c1_r<T: Real>(r: T) -> T {
    let a = (T::one() - r) * half();
    -T::lit(7.0) * a * ln2::<T>() - a - (T::lit(3.0) - T::lit(2.0) * r) * half::<T>() * ln_pi::<T>()
}

/// `C_1(p) = 2^{-7(p-1)/(2p)} e^{-(p-1)/(2p)} π^{-(3p-2)/(2p)}`, `p ∈ [1, ∞]`.
pub fn c1<T: Real>(p: Exp<T>) -> Result<T> {
    Ok(ln_c1_r(p.recip()).exp())
}

/// `C_2(p) = 2^{-7(p-2)/(2p)} e^{-(p-2)/(2p)} π^{-(3p-4)/(2p)}`, `p ∈ [2, ∞]`.
pub fn c2<T: Real>(p: Exp<T>) -> Result<T> {
    if p < Exp::Finite(T::lit(2.0)) {
        return Err(domain(format!("C_2 needs p >= 2, got {p}")));
    }
    let r = p.recip();
    let a = (T::one() - T::lit(2.0) * r) * half();
    let ln = -T::lit(7.0) * a * ln2::<T>()
        - a
        - (T::lit(3.0) - T::lit(4.0) * r) * half::<T>() * ln_pi::<T>();
    Ok(ln.exp())
}

fn ln_c3_rs<T: Real>(r: T, s: T) -> T {
    let d = s - r;
    -T::lit(3.5) * d * ln2::<T>() - d * half() - (d + half()) * ln_pi::<T>()
}

pub fn ln_c3<T: Real>(p: Exp<T>, q: Exp<T>) -> Result<T> {
    let (r, s) = ordered_pair(p, q)?;
    Ok(ln_c3_rs(r, s))
}

/// `C_3(p, q) = 2^{-7(p-q)/(2pq)} e^{-(p-q)/(2pq)} π^{-(2p-2q+pq)/(2pq)}`.
pub fn c3<T: Real>(p: Exp<T>, q: Exp<T>) -> Result<T> {
    ln_c3(p, q).map(T::exp)
}

/// `ln C_3(p, p/2)`; at `p = ∞` this is `ln π^{-1/2}`.
pub fn ln_c3_half<T: Real>(p: Exp<T>) -> Result<T> {
    if p < Exp::Finite(T::lit(2.0)) {
        return Err(domain(format!("C_3(p, p/2) needs p >= 2, got {p}")));
    }
    let r = p.recip();
    Ok(ln_c3_rs(r, T::lit(2.0) * r))
}

pub fn c3_half<T: Real>(p: Exp<T>) -> Result<T> {
    ln_c3_half(p).map(T::exp)
}

/// `C_4(p)`: `C_∞^{(4-2p)/p}` for `1 < p < 2`, `C_∞^{(2p-4)/p}` for `p >= 2`.
pub fn c4<T: Real>(p: Exp<T>, c_infty: T) -> Result<T> {
    check_c_infty(c_infty)?;
    if p <= Exp::Finite(T::one()) {
        return Err(domain(format!("C_4 needs p > 1, got {p}")));
    }
    let r = p.recip();
    let e = if p < Exp::Finite(T::lit(2.0)) {
        T::lit(4.0) * r - T::lit(2.0)
    } else {
        T::lit(2.0) - T::lit(4.0) * r
    };
    Ok(ln_pow(c_infty, e).exp())
}

/// `C_5(p, q)`, three branches: `1 < p < 2`, `p >= 2 > q`, `q >= 2`.
///
/// The last two branches do not meet at `q = 2` unless `C_∞ = 1` or `p = 2`.
pub fn c5<T: Real>(p: Exp<T>, q: Exp<T>, c_infty: T) -> Result<T> {
    check_c_infty(c_infty)?;
    if p <= Exp::Finite(T::one()) {
        return Err(domain(format!("C_5 needs p > 1, got {p}")));
    }
    let (r, s) = ordered_pair(p, q)?;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let e = if p < Exp::Finite(two) {
        four * r - two
    } else if q < Exp::Finite(two) {
        two - four * r
    } else {
        two - four * s
    };
    Ok(ln_pow(c_infty, e).exp())
}

/// `ln(1 + 3 C_∞^{(2p-4)/p})`, the Riesz factor shared by the theorems.
pub fn ln_riesz_factor<T: Real>(p: Exp<T>, c_infty: T) -> Result<T> {
    check_c_infty(c_infty)?;
    let e = T::lit(2.0) - T::lit(4.0) * p.recip();
    Ok((T::lit(3.0) * ln_pow(c_infty, e).exp()).ln_1p())
}

/// `ln K` for `K = (8p C_3(p, p/2)/(p-3)) (1 + 3 C_∞^{(2p-4)/p})`, the
/// coefficient of the quadratic term in the local existence estimate.
pub fn ln_nonlinear_factor<T: Real>(p: Exp<T>, c_infty: T) -> Result<T> {
    let p = p.check_p_role()?;
    let r = p.recip();
    let ln_ratio = -(T::one() - T::lit(3.0) * r).ln();
    Ok(T::lit(8.0).ln() + ln_ratio + ln_c3_half(p)? + ln_riesz_factor(p, c_infty)?)
}

pub fn nonlinear_factor<T: Real>(p: Exp<T>, c_infty: T) -> Result<T> {
    ln_nonlinear_factor(p, c_infty).map(T::exp)
}

fn check_pq<T: Real>(p: Exp<T>, q: Exp<T>) -> Result<()> {
    p.check_p_role()?;
    q.check_q_role()?;
    Ok(())
}

/// Base of the `K_0` power written out explicitly:
/// `(p/(p-3)) 2^{3-7/(2p)} e^{-1/(2p)} π^{-(p+2)/(2p)} (1 + 3 C_∞^{(2p-4)/p})`.
pub fn ln_k0_base<T: Real>(p: Exp<T>, c_infty: T) -> Result<T> {
    let p = p.check_p_role()?;
    let r = p.recip();
    let ln_ratio = -(T::one() - T::lit(3.0) * r).ln();
    let ln = ln_ratio + (T::lit(3.0) - T::lit(3.5) * r) * ln2::<T>()
        - r * half()
        - (half::<T>() + r) * ln_pi::<T>()
        + ln_riesz_factor(p, c_infty)?;
    Ok(ln)
}

/// Outer power of `K_0`: `2p/(p-3) + 2q/(3-q)`.
pub fn k0_outer_exponent<T: Real>(p: Exp<T>, q: Exp<T>) -> T {
    p.p_pair_exponent() + q.q_pair_exponent()
}

pub fn ln_k0<T: Real>(p: Exp<T>, q: Exp<T>, c_infty: T) -> Result<T> {
    check_pq(p, q)?;
    let s = q.recip();
    let r = p.recip();
    // 3(p-q)/(p(3-q)) = 3(1/q - 1/p)/(3/q - 1)
    let tail = T::lit(3.0) * (s - r) / (T::lit(3.0) * s - T::one());
    Ok(k0_outer_exponent(p, q) * ln_k0_base(p, c_infty)? - tail * ln_4pi::<T>())
}

/// `K_0(p, q)`, the critical constant of the scaling-invariant norm pair.
pub fn k0<T: Real>(p: Exp<T>, q: Exp<T>, c_infty: T) -> Result<T> {
    ln_k0(p, q, c_infty).map(T::exp)
}

/// `ln K_0` assembled from `K` and `C_0(p, q)` instead of the expanded base.
pub fn ln_k0_from_parts<T: Real>(p: Exp<T>, q: Exp<T>, c_infty: T) -> Result<T> {
    check_pq(p, q)?;
    let ln_k = match p {
        Exp::Finite(pv) => {
            let c3 = ln_c3(p, Exp::Finite(pv / T::lit(2.0)))?;
            (T::lit(8.0) * pv / (pv - T::lit(3.0))).ln() + c3 + ln_riesz_factor(p, c_infty)?
        }
        Exp::Infinity => ln_nonlinear_factor(p, c_infty)?,
    };
    Ok(k0_outer_exponent(p, q) * ln_k + q.q_pair_exponent() * ln_c0(p, q)?)
}

/// Right-hand side of the `L^3` smallness condition,
/// `e^{1/(2p)} π^{(2p-1)/(2p)} (p-3) / (2^{2-1/(2p)} (1 + 3C_∞^{(2p-4)/p}) p)`.
pub fn idc3p_threshold<T: Real>(p: Exp<T>, c_infty: T) -> Result<T> {
    let pv = p
        .finite()
        .ok_or_else(|| domain("the L^3 smallness threshold needs a finite p"))?;
    if pv <= T::lit(3.0) {
        return Err(domain(format!("p = {pv} must exceed 3")));
    }
    let r = pv.recip();
    let ln = r * half()
        + (T::one() - r * half()) * ln_pi::<T>()
        + (T::one() - T::lit(3.0) * r).ln()
        - (T::lit(2.0) - r * half()) * ln2::<T>()
        - ln_riesz_factor(p, c_infty)?;
    Ok(ln.exp())
}

/// Largest threshold over a grid of finite exponents; ties keep the first.
pub fn best_idc3p_threshold<T: Real>(p_grid: &[Exp<T>], c_infty: T) -> Result<(Exp<T>, T)> {
    let mut best: Option<(Exp<T>, T)> = None;
    for &p in p_grid {
        let t = idc3p_threshold(p, c_infty)?;
        if best.map_or(true, |(_, b)| t > b) {
            best = Some((p, t));
        }
    }
    best.ok_or_else(|| domain("empty exponent grid"))
}

use serde::{Deserialize, Serialize};

use crate::constants::{ln_c0, ln_c3_half, ConstantsContext, LebesgueExponent as Exp};
use crate::error::{domain, invariant, Result};
use crate::real::Real;

/// A bracket endpoint, or the marker for data that is identically zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TimeBound<T> {
    Time(T),
    /// Zero data: the bound is void rather than `0` or `+∞`.
    Vacuous,
}

impl<T: Real> TimeBound<T> {
    pub fn time(self) -> Option<T> {
        match self {
            Self::Time(t) => Some(t),
            Self::Vacuous => None,
        }
    }

    pub fn is_vacuous(self) -> bool {
        matches!(self, Self::Vacuous)
    }
}

fn check_norm<T: Real>(norm: T) -> Result<bool> {
    if !(norm >= T::zero()) || !norm.is_finite() {
        return Err(domain(format!("norm {norm} must be finite and nonnegative")));
    }
    Ok(norm > T::zero())
}

/// `ln T_l = -(2p/(p-3)) (ln K + ln‖u₀‖_p)`.
pub fn ln_t_lower<T: Real>(p: Exp<T>, norm_p: T, ctx: &ConstantsContext<T>) -> Result<Option<T>> {
    let p = p.check_p_role()?;
    if !check_norm(norm_p)? {
        return Ok(None);
    }
    Ok(Some(-p.p_pair_exponent() * (ctx.ln_nonlinear_factor(p)? + norm_p.ln())))
}

/// Lower end of the existence bracket from the `L^p` norm of the data.
pub fn t_lower<T: Real>(p: Exp<T>, norm_p: T, ctx: &ConstantsContext<T>) -> Result<TimeBound<T>> {
    Ok(ln_t_lower(p, norm_p, ctx)?.map_or(TimeBound::Vacuous, |l| TimeBound::Time(l.exp())))
}

/// `ln T_r = (2q/(3-q)) (ln K + ln C_0(p, q) + ln‖u₀‖_q)`.
pub fn ln_t_upper<T: Real>(p: Exp<T>, q: Exp<T>, norm_q: T, ctx: &ConstantsContext<T>) -> Result<Option<T>> {
    let p = p.check_p_role()?;
    let q = q.check_q_role()?;
    if !check_norm(norm_q)? {
        return Ok(None);
    }
    let ln = ctx.ln_nonlinear_factor(p)? + ln_c0(p, q)? + norm_q.ln();
    Ok(Some(q.q_pair_exponent() * ln))
}

/// Upper end of the bracket: past it the solution is global and decays.
pub fn t_upper<T: Real>(p: Exp<T>, q: Exp<T>, norm_q: T, ctx: &ConstantsContext<T>) -> Result<TimeBound<T>> {
    Ok(ln_t_upper(p, q, norm_q, ctx)?.map_or(TimeBound::Vacuous, |l| TimeBound::Time(l.exp())))
}

/// `T_l` and `T_r` for one exponent pair together with every input they
/// were computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TimeBracket<T> {
    pub t_l: T,
    pub t_r: T,
    pub p: Exp<T>,
    pub q: Exp<T>,
    pub norm_p: T,
    pub norm_q: T,
    pub c_infty: T,
    pub c3: T,
    pub c0: T,
}

impl<T: Real> TimeBracket<T> {
    /// `None` when either norm vanishes.
    pub fn new(p: Exp<T>, q: Exp<T>, norm_p: T, norm_q: T, ctx: &ConstantsContext<T>) -> Result<Option<Self>> {
        let (Some(l), Some(r)) = (ln_t_lower(p, norm_p, ctx)?, ln_t_upper(p, q, norm_q, ctx)?) else {
            return Ok(None);
        };
        Ok(Some(Self {
            t_l: l.exp(),
            t_r: r.exp(),
            p,
            q,
            norm_p,
            norm_q,
            c_infty: ctx.c_infty,
            c3: ln_c3_half(p)?.exp(),
            c0: ln_c0(p, q)?.exp(),
        }))
    }

    /// Re-derives both ends from the stored inputs and demands exact equality.
    pub fn verify(&self) -> Result<()> {
        let ctx = ConstantsContext::with_c_infty(self.c_infty);
        let again = Self::new(self.p, self.q, self.norm_p, self.norm_q, &ctx)?
            .ok_or_else(|| invariant("stored bracket has zero norms"))?;
        if again.t_l != self.t_l || again.t_r != self.t_r {
            return Err(invariant(format!(
                "bracket ({}, {}) recomputes to ({}, {})",
                self.t_l, self.t_r, again.t_l, again.t_r
            )));
        }
        Ok(())
    }

    pub fn is_global(&self) -> bool {
        self.t_r <= self.t_l
    }
}

/// `C_b = (p-3)/(8p C_3(p, p/2)(1 + 3C_∞^{(2p-4)/p}))`, the reciprocal of the
/// quadratic coefficient.
pub fn blowup_constant<T: Real>(p: Exp<T>, ctx: &ConstantsContext<T>) -> Result<T> {
    Ok((-ctx.ln_nonlinear_factor(p)?).exp())
}

/// Lower bound on `‖u(t)‖_p` for a solution that ceases to exist at `t_max`.
pub fn blowup_floor<T: Real>(t: T, p: Exp<T>, t_max: T, ctx: &ConstantsContext<T>) -> Result<T> {
    if !(t >= T::zero()) || !(t < t_max) || !t_max.is_finite() {
        return Err(domain(format!("need 0 <= t < t_max, got t = {t}, t_max = {t_max}")));
    }
    let p = p.check_p_role()?;
    Ok(blowup_constant(p, ctx)? * (t_max - t).powf(-p.half_excess()))
}

/// Upper bound on `‖u(t)‖_p` for `t > T_r(p, q)`.
///
/// The printed form `(1 - √(1 - x)) / ((K/2) t^{(p-3)/(2p)})` with
/// `x = K C_0 ‖u₀‖_q t^{-(3-q)/(2q)} = (T_r/t)^{(3-q)/(2q)}` is evaluated as
/// `x / (1 + √(1 - x))` to avoid cancellation at large `t`.
pub fn decay_envelope<T: Real>(t: T, p: Exp<T>, q: Exp<T>, norm_q: T, ctx: &ConstantsContext<T>) -> Result<T> {
    let ln_tr = ln_t_upper(p, q, norm_q, ctx)?;
    let Some(ln_tr) = ln_tr else {
        // zero data stays zero
        return Ok(T::zero());
    };
    if !(t > T::zero()) || !t.is_finite() || !(t.ln() > ln_tr) {
        return Err(domain(format!(
            "decay envelope needs t > T_r = {}, got {t}",
            ln_tr.exp()
        )));
    }
    let ln_k = ctx.ln_nonlinear_factor(p)?;
    let x = (ln_k + ln_c0(p, q)? + norm_q.ln() - q.q_time_exponent() * t.ln()).exp();
    let radicand = T::one() - x;
    assert!(radicand >= T::zero(), "radicand {radicand} negative past T_r");
    let lead = T::lit(2.0) * (-ln_k - p.half_excess() * t.ln()).exp();
    Ok(lead * x / (T::one() + radicand.sqrt()))
}

/// Which bound an [`Envelope`] evaluates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum EnvelopeKind<T> {
    Decay { q: Exp<T>, norm_q: T, t_r: T },
    BlowupFloor { t_max: T, c_b: T },
}

/// A bound on `‖u(t)‖_p` sampled at a list of times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Envelope<T> {
    pub p: Exp<T>,
    pub c_infty: T,
    #[serde(flatten)]
    pub kind: EnvelopeKind<T>,
    pub samples: Vec<(T, T)>,
}

impl<T: Real> Envelope<T> {
    pub fn decay(p: Exp<T>, q: Exp<T>, norm_q: T, times: &[T], ctx: &ConstantsContext<T>) -> Result<Self> {
        let t_r = t_upper(p, q, norm_q, ctx)?.time().unwrap_or(T::zero());
        let samples = times
            .iter()
            .map(|&t| Ok((t, decay_envelope(t, p, q, norm_q, ctx)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            p,
            c_infty: ctx.c_infty,
            kind: EnvelopeKind::Decay { q, norm_q, t_r },
            samples,
        })
    }

    pub fn blowup(p: Exp<T>, t_max: T, times: &[T], ctx: &ConstantsContext<T>) -> Result<Self> {
        let samples = times
            .iter()
            .map(|&t| Ok((t, blowup_floor(t, p, t_max, ctx)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            p,
            c_infty: ctx.c_infty,
            kind: EnvelopeKind::BlowupFloor {
                t_max,
                c_b: blowup_constant(p, ctx)?,
            },
            samples,
        })
    }
}

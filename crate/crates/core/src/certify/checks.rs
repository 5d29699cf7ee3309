use serde::{Deserialize, Serialize};

use crate::certify::bracket::{ln_t_lower, ln_t_upper, TimeBracket};
use crate::constants::{ConstantsContext, LebesgueExponent as Exp};
use crate::error::{domain, invariant, Result};
use crate::fields::{ln_q_pair_from_norms, GridField};
use crate::real::Real;

/// Relative width of the band in which a margin counts as a tie.
pub const BOUNDARY_BAND: f64 = 1e-12;
/// Allowed log-domain disagreement between the two forms of the pair test.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

/// One measured norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NormEntry<T> {
    pub p: Exp<T>,
    pub value: T,
}

/// Norms of one field at a set of exponents.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Real")]
pub struct NormSet<T>(pub Vec<NormEntry<T>>);

impl<T: Real> NormSet<T> {
    /// Measures `field` at every exponent in `ps`, dropping repeats.
    pub fn measure(field: &GridField<T>, ps: &[Exp<T>]) -> Self {
        let mut unique: Vec<Exp<T>> = Vec::new();
        for &p in ps {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        unique.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
        let values = field.norms(&unique);
        Self(
            unique
                .into_iter()
                .zip(values)
                .map(|(p, value)| NormEntry { p, value })
                .collect(),
        )
    }

    pub fn get(&self, p: Exp<T>) -> Result<T> {
        self.0
            .iter()
            .find(|e| e.p == p)
            .map(|e| e.value)
            .ok_or_else(|| domain(format!("no norm recorded at p = {p}")))
    }

    /// The same norms for `λ u(λ x)`: `‖u_λ‖_p = λ^{1-3/p} ‖u‖_p`.
    pub fn rescaled(&self, lambda: T) -> Self {
        Self(
            self.0
                .iter()
                .map(|e| NormEntry {
                    p: e.p,
                    value: e.value * lambda.powf(T::one() - T::lit(3.0) * e.p.recip()),
                })
                .collect(),
        )
    }
}

fn band<T: Real>(margin: T, scale: T) -> bool {
    margin.abs() < T::lit(BOUNDARY_BAND) * scale.abs().max(T::min_positive_value())
}

fn lex<T: Real>(a: (Exp<T>, Exp<T>), b: (Exp<T>, Exp<T>)) -> std::cmp::Ordering {
    a.0.to_f64()
        .total_cmp(&b.0.to_f64())
        .then(a.1.to_f64().total_cmp(&b.1.to_f64()))
}

/// Outcome of the strict `L^3` smallness test at the most favourable `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct L3Check<T> {
    pub passed: bool,
    pub norm_l3: T,
    pub best_p: Exp<T>,
    pub threshold: T,
    /// `threshold - ‖u₀‖_3`; must be strictly positive to pass.
    pub margin: T,
    pub within_band: bool,
}

pub fn check_l3_from_norm<T: Real>(norm_l3: T, p_grid: &[Exp<T>], ctx: &ConstantsContext<T>) -> Result<L3Check<T>> {
    let mut best: Option<(Exp<T>, T)> = None;
    for &p in p_grid.iter().filter(|p| !p.is_infinite()) {
        let t = ctx.idc3p_threshold(p)?;
        let better = match best {
            None => true,
            Some((bp, bt)) => t > bt || (t == bt && p.to_f64() < bp.to_f64()),
        };
        if better {
            best = Some((p, t));
        }
    }
    let (best_p, threshold) = best.ok_or_else(|| domain("the L^3 test needs a finite p in the grid"))?;
    let margin = threshold - norm_l3;
    Ok(L3Check {
        passed: margin > T::zero(),
        norm_l3,
        best_p,
        threshold,
        margin,
        within_band: band(margin, threshold),
    })
}

pub fn check_l3_smallness<T: Real>(field: &GridField<T>, p_grid: &[Exp<T>], ctx: &ConstantsContext<T>) -> Result<L3Check<T>> {
    check_l3_from_norm(field.norm(Exp::Finite(T::lit(3.0))), p_grid, ctx)
}

/// The pair test at one `(p, q)`, in both of its equivalent forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PairOutcome<T> {
    pub p: Exp<T>,
    pub q: Exp<T>,
    /// `ln Q^p_q(u₀)`; absent for zero data.
    pub ln_q: Option<T>,
    pub ln_inv_k0: T,
    /// `ln(1/K_0) - ln Q`; absent (unbounded) for zero data.
    pub log_margin: Option<T>,
    pub bracket: Option<TimeBracket<T>>,
    pub passed: bool,
    pub within_band: bool,
}

impl<T: Real> PairOutcome<T> {
    fn margin_key(&self) -> T {
        self.log_margin.unwrap_or(T::infinity())
    }
}

/// Evaluates `Q ≤ 1/K_0` and `T_r ≤ T_l` at one pair and insists they agree.
pub fn pair_outcome<T: Real>(p: Exp<T>, q: Exp<T>, norms: &NormSet<T>, ctx: &ConstantsContext<T>) -> Result<PairOutcome<T>> {
    let (norm_p, norm_q) = (norms.get(p)?, norms.get(q)?);
    let ln_q = ln_q_pair_from_norms(p, q, norm_p, norm_q)?;
    let ln_q = (ln_q > T::neg_infinity()).then_some(ln_q);
    let ln_inv_k0 = -ctx.ln_k0(p, q)?;
    let log_margin = ln_q.map(|l| ln_inv_k0 - l);
    let scale = ln_inv_k0.abs().max(ln_q.map_or(T::zero(), |l| l.abs())).max(T::one());
    let within_band = log_margin.map_or(false, |m| band(m, scale));
    let passed = log_margin.map_or(true, |m| m >= T::zero());

    let bracket = TimeBracket::new(p, q, norm_p, norm_q, ctx)?;
    if let (Some(m), Some(_)) = (log_margin, &bracket) {
        let (l, r) = (
            ln_t_lower(p, norm_p, ctx)?.expect("nonzero norm"),
            ln_t_upper(p, q, norm_q, ctx)?.expect("nonzero norm"),
        );
        let gap = l - r;
        if (gap - m).abs() > T::lit(EQUIVALENCE_TOLERANCE) * scale {
            return Err(invariant(format!(
                "at (p, q) = ({p}, {q}) ln T_l - ln T_r = {gap} but ln(1/K_0) - ln Q = {m}"
            )));
        }
        if (gap >= T::zero()) != passed && !within_band {
            return Err(invariant(format!(
                "at (p, q) = ({p}, {q}) the bracket and norm-pair tests disagree"
            )));
        }
    }
    Ok(PairOutcome {
        p,
        q,
        ln_q,
        ln_inv_k0,
        log_margin,
        bracket,
        passed,
        within_band,
    })
}

/// Pair test over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NormPairCheck<T> {
    pub passed: bool,
    /// Index into `pairs` of the largest log-margin, ties broken by the
    /// smaller `(p, q)`.
    pub best: usize,
    pub pairs: Vec<PairOutcome<T>>,
}

impl<T: Real> NormPairCheck<T> {
    pub fn best(&self) -> &PairOutcome<T> {
        &self.pairs[self.best]
    }
}

pub fn check_norm_pair_from_norms<T: Real>(
    pairs: &[(Exp<T>, Exp<T>)],
    norms: &NormSet<T>,
    ctx: &ConstantsContext<T>,
) -> Result<NormPairCheck<T>> {
    if pairs.is_empty() {
        return Err(domain("empty (p, q) grid"));
    }
    let outcomes = pairs
        .iter()
        .map(|&(p, q)| pair_outcome(p, q, norms, ctx))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        let b = &outcomes[best];
        let (mi, mb) = (o.margin_key(), b.margin_key());
        if mi > mb || (mi == mb && lex((o.p, o.q), (b.p, b.q)).is_lt()) {
            best = i;
        }
    }
    Ok(NormPairCheck {
        passed: outcomes.iter().any(|o| o.passed),
        best,
        pairs: outcomes,
    })
}

pub fn check_norm_pair<T: Real>(
    field: &GridField<T>,
    pairs: &[(Exp<T>, Exp<T>)],
    ctx: &ConstantsContext<T>,
) -> Result<NormPairCheck<T>> {
    let ps: Vec<_> = pairs.iter().flat_map(|&(p, q)| [p, q]).collect();
    check_norm_pair_from_norms(pairs, &NormSet::measure(field, &ps), ctx)
}

/// The tightest bracket over a grid: largest `T_l` and smallest `T_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BracketSummary<T> {
    pub t_l: T,
    pub t_r: T,
    pub argmax_p: Exp<T>,
    pub argmin_pq: (Exp<T>, Exp<T>),
}

impl<T: Real> BracketSummary<T> {
    /// `None` when no pair carries a finite bracket (zero data).
    pub fn from_pairs(pairs: &[PairOutcome<T>]) -> Option<Self> {
        let mut out: Option<Self> = None;
        for b in pairs.iter().filter_map(|o| o.bracket.as_ref()) {
            let Some(s) = out.as_mut() else {
                out = Some(Self {
                    t_l: b.t_l,
                    t_r: b.t_r,
                    argmax_p: b.p,
                    argmin_pq: (b.p, b.q),
                });
                continue;
            };
            if b.t_l > s.t_l || (b.t_l == s.t_l && b.p.to_f64() < s.argmax_p.to_f64()) {
                s.t_l = b.t_l;
                s.argmax_p = b.p;
            }
            if b.t_r < s.t_r || (b.t_r == s.t_r && lex((b.p, b.q), s.argmin_pq).is_lt()) {
                s.t_r = b.t_r;
                s.argmin_pq = (b.p, b.q);
            }
        }
        out
    }

    pub fn intersects(&self) -> bool {
        self.t_r <= self.t_l
    }
}

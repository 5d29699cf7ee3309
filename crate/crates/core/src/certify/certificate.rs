use serde::{Deserialize, Serialize};

use crate::certify::checks::{
    check_l3_from_norm, check_norm_pair_from_norms, BracketSummary, L3Check, NormPairCheck, NormSet,
    BOUNDARY_BAND, EQUIVALENCE_TOLERANCE,
};
use crate::constants::{ConstantsContext, LebesgueExponent as Exp};
use crate::error::{domain, invariant, Error, Result};
use crate::fields::{BoxGrid, FieldRecipe, GridField};
use crate::real::Real;
use crate::spectral::Fft3;

pub const CERTIFICATE_FORMAT_VERSION: u32 = 1;

pub const BRACKET_SEMANTICS: &str =
    "for every grid pair the maximal existence time satisfies either T_max = inf or T_max in (T_l, T_r]; \
     only the hypotheses (norms and constants) are certified";

/// Exponents searched by [`make_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct SearchConfig<T> {
    pub p_grid: Vec<Exp<T>>,
    pub q_grid: Vec<Exp<T>>,
}

impl<T: Real> Default for SearchConfig<T> {
    fn default() -> Self {
        let f = |v: f64| Exp::Finite(T::lit(v));
        Self {
            p_grid: [3.5, 4.0, 5.0, 6.0, 8.0, 12.0, 24.0]
                .map(f)
                .into_iter()
                .chain([Exp::Infinity])
                .collect(),
            q_grid: [1.0, 1.5, 2.0, 2.5, 2.9].map(f).to_vec(),
        }
    }
}

impl<T: Real> SearchConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() || self.q_grid.is_empty() {
            return Err(domain("search grids must be nonempty"));
        }
        for p in &self.p_grid {
            p.check_p_role()?;
        }
        for q in &self.q_grid {
            q.check_q_role()?;
        }
        Ok(())
    }

    /// All `(p, q)` in lexicographic order.
    pub fn pairs(&self) -> Vec<(Exp<T>, Exp<T>)> {
        let mut ps = self.p_grid.clone();
        let mut qs = self.q_grid.clone();
        ps.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
        qs.sort_by(|a, b| a.to_f64().total_cmp(&b.to_f64()));
        ps.dedup();
        qs.dedup();
        ps.iter().flat_map(|&p| qs.iter().map(move |&q| (p, q))).collect()
    }

    /// Every exponent a certificate needs a norm at, including 3.
    pub fn exponents(&self) -> Vec<Exp<T>> {
        let mut v = vec![Exp::Finite(T::lit(3.0))];
        v.extend(&self.p_grid);
        v.extend(&self.q_grid);
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Real")]
pub enum Verdict<T> {
    GlobalByL3Smallness {
        p: Exp<T>,
        margin: T,
    },
    /// `margin` is `ln(1/K_0) - ln Q`, absent for zero data.
    GlobalByNormPair {
        p: Exp<T>,
        q: Exp<T>,
        margin: Option<T>,
    },
    /// No single pair passes, but the largest `T_l` reaches the smallest `T_r`,
    /// which leaves no room for a finite existence time.
    GlobalByBracketIntersection {
        t_l: T,
        t_r: T,
        p: Exp<T>,
        q: Exp<T>,
    },
    UndeterminedBracket {
        t_l: T,
        t_r: T,
    },
    /// Numerical evidence only: a simulation reached `t_reached > t_r`.
    SimulationSupported {
        t_reached: T,
        t_r: T,
    },
}

impl<T: Real> Verdict<T> {
    pub fn is_global(&self) -> bool {
        !matches!(self, Self::UndeterminedBracket { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GlobalByL3Smallness { .. } => "global_by_l3_smallness",
            Self::GlobalByNormPair { .. } => "global_by_norm_pair",
            Self::GlobalByBracketIntersection { .. } => "global_by_bracket_intersection",
            Self::UndeterminedBracket { .. } => "undetermined_bracket",
            Self::SimulationSupported { .. } => "simulation_supported",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRef {
    pub c_infty: f64,
    pub c_infty_error: f64,
    pub cutoff_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FieldRecord<T> {
    pub recipe: Option<FieldRecipe>,
    pub grid: BoxGrid<T>,
    pub tail_note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub boundary_band: f64,
    pub equivalence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            boundary_band: BOUNDARY_BAND,
            equivalence: EQUIVALENCE_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Certificate<T> {
    pub version: u32,
    pub tool_version: String,
    pub verdict: Verdict<T>,
    pub semantics: String,
    pub brackets: Option<BracketSummary<T>>,
    pub l3: L3Check<T>,
    pub norm_pair: NormPairCheck<T>,
    pub norms: NormSet<T>,
    pub constants: ConstantsRef,
    pub field: FieldRecord<T>,
    pub search: SearchConfig<T>,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// Verdict from the two checks and the bracket, in order of precedence.
pub fn decide<T: Real>(
    l3: &L3Check<T>,
    pair: &NormPairCheck<T>,
    brackets: Option<&BracketSummary<T>>,
) -> Result<Verdict<T>> {
    if l3.passed {
        return Ok(Verdict::GlobalByL3Smallness {
            p: l3.best_p,
            margin: l3.margin,
        });
    }
    if pair.passed {
        let b = pair.best();
        return Ok(Verdict::GlobalByNormPair {
            p: b.p,
            q: b.q,
            margin: b.log_margin,
        });
    }
    let b = brackets.ok_or_else(|| invariant("nonzero data without a bracket"))?;
    if b.intersects() {
        Ok(Verdict::GlobalByBracketIntersection {
            t_l: b.t_l,
            t_r: b.t_r,
            p: b.argmax_p,
            q: b.argmin_pq.1,
        })
    } else {
        Ok(Verdict::UndeterminedBracket { t_l: b.t_l, t_r: b.t_r })
    }
}

/// Certificate from norms measured elsewhere.
pub fn certificate_from_norms<T: Real>(
    norms: NormSet<T>,
    field: FieldRecord<T>,
    search: &SearchConfig<T>,
    ctx: &ConstantsContext<T>,
) -> Result<Certificate<T>> {
    search.validate()?;
    let l3 = check_l3_from_norm(norms.get(Exp::Finite(T::lit(3.0)))?, &search.p_grid, ctx)?;
    let norm_pair = check_norm_pair_from_norms(&search.pairs(), &norms, ctx)?;
    let brackets = BracketSummary::from_pairs(&norm_pair.pairs);
    let verdict = decide(&l3, &norm_pair, brackets.as_ref())?;
    Ok(Certificate {
        version: CERTIFICATE_FORMAT_VERSION,
        tool_version: crate::TOOL_VERSION.to_string(),
        verdict,
        semantics: BRACKET_SEMANTICS.to_string(),
        brackets,
        l3,
        norm_pair,
        norms,
        constants: ConstantsRef {
            c_infty: ctx.c_infty.to_f64_lossy(),
            c_infty_error: ctx.c_infty_error.to_f64_lossy(),
            cutoff_hash: ctx.hash(),
        },
        field,
        search: search.clone(),
        tolerances: Tolerances::default(),
        timestamp: None,
    })
}

/// Residual above which a field not flagged solenoidal is rejected.
pub const SOLENOIDAL_TOLERANCE: f64 = 1e-10;

/// Runs both checks on a divergence-free field and records everything used.
pub fn make_certificate<T: Real>(
    field: &GridField<T>,
    search: &SearchConfig<T>,
    ctx: &ConstantsContext<T>,
) -> Result<Certificate<T>> {
    if !field.solenoidal {
        let r = field.divergence_residual(&Fft3::new(field.grid.n));
        if !(r.to_f64_lossy() <= SOLENOIDAL_TOLERANCE) {
            return Err(Error::NotSolenoidal(r.to_f64_lossy()));
        }
    }
    search.validate()?;
    let norms = NormSet::measure(field, &search.exponents());
    let record = FieldRecord {
        recipe: field.recipe.clone(),
        grid: field.grid,
        tail_note: field.tail_note(),
    };
    certificate_from_norms(norms, record, search, ctx)
}

impl<T: Real> Certificate<T> {
    /// Replaces an undetermined verdict once a simulation has run past `T_r`.
    pub fn supported_by_simulation(mut self, t_reached: T) -> Result<Self> {
        let Verdict::UndeterminedBracket { t_r, .. } = self.verdict else {
            return Err(domain(format!(
                "only an undetermined bracket can be upgraded, verdict is {}",
                self.verdict.name()
            )));
        };
        if !(t_reached > t_r) {
            return Err(domain(format!("simulation stopped at {t_reached}, not past T_r = {t_r}")));
        }
        self.verdict = Verdict::SimulationSupported { t_reached, t_r };
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

use serde::{Deserialize, Serialize};

use crate::certify::{blowup_floor, decay_envelope, TimeBracket, Verdict};
use crate::constants::ConstantsContext;
use crate::error::Result;
use crate::mildsolve::run::{RunStatus, SolverRun};

pub const SIMULATION_NOTE: &str = "numerical evidence consistent with T_max = inf: by the dichotomy, survival past T_r \
     excludes a finite T_max under the theorem's hypotheses, subject to discretization error";

/// Measured norm against a bound at one sample time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub t: f64,
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub bracket: TimeBracket<f64>,
    pub status: RunStatus,
    pub t_reached: f64,
    pub refinement_agreement: Option<f64>,
    /// Set only when the run supports global existence numerically.
    pub verdict: Option<Verdict<f64>>,
    pub annotation: String,
    /// `‖u(t)‖_p` against the decay envelope for sampled `t > T_r`.
    pub decay: Vec<BoundCheck>,
    pub decay_holds: bool,
    /// `‖u(t)‖_p` against the blow-up floor, with `T_max` taken as the
    /// time the run stopped. Filled only for exploded runs; here the
    /// measured norm should stay above the bound.
    pub blowup: Vec<BoundCheck>,
    /// Largest relative norm difference to the same run on another box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_sensitivity: Option<f64>,
}

/// Applies the existence dichotomy to a finished run.
pub fn dichotomy_verdict(run: &SolverRun, bracket: &TimeBracket<f64>, ctx: &ConstantsContext<f64>) -> Result<DichotomyReport> {
    let series = run.series(bracket.p);
    let mut decay = Vec::new();
    if let Some(s) = &series {
        for &(t, measured) in s.iter().filter(|(t, _)| *t > bracket.t_r) {
            let bound = decay_envelope(t, bracket.p, bracket.q, bracket.norm_q, ctx)?;
            decay.push(BoundCheck {
                t,
                measured,
                bound,
                holds: measured <= bound,
            });
        }
    }
    let mut blowup = Vec::new();
    if run.status == RunStatus::NormExploded {
        if let Some(s) = &series {
            for &(t, measured) in s.iter().filter(|(t, _)| *t < run.t_reached) {
                let bound = blowup_floor(t, bracket.p, run.t_reached, ctx)?;
                blowup.push(BoundCheck {
                    t,
                    measured,
                    bound,
                    holds: measured >= bound,
                });
            }
        }
    }

    let refined = run
        .refinement_agreement
        .is_some_and(|a| a <= run.config.refinement_tolerance);
    let supported = run.status == RunStatus::Completed && run.t_reached > bracket.t_r && refined;
    let (verdict, annotation) = if supported {
        (
            Some(Verdict::SimulationSupported {
                t_reached: run.t_reached,
                t_r: bracket.t_r,
            }),
            SIMULATION_NOTE.to_string(),
        )
    } else if run.status != RunStatus::Completed {
        (None, format!("run ended as {:?}; the bracket stands", run.status))
    } else if !refined {
        (None, "no refinement agreement below tolerance; the bracket stands".to_string())
    } else {
        (
            None,
            format!("run stopped at {} before T_r = {}; the bracket stands", run.t_reached, bracket.t_r),
        )
    };
    let note = if series.is_none() {
        format!("{annotation}; p = {} was not monitored", bracket.p)
    } else {
        annotation
    };
    Ok(DichotomyReport {
        bracket: bracket.clone(),
        status: run.status,
        t_reached: run.t_reached,
        refinement_agreement: run.refinement_agreement,
        verdict,
        annotation: note,
        decay_holds: decay.iter().all(|c| c.holds),
        decay,
        blowup,
        box_sensitivity: None,
    })
}

impl DichotomyReport {
    /// Records how far the monitored norms move when the same data is run
    /// on a different box.
    pub fn with_box_sensitivity(mut self, a: &SolverRun, b: &SolverRun) -> Self {
        self.box_sensitivity = Some(crate::mildsolve::run::norm_discrepancy(a, b));
        self
    }
}

//! Mild solutions on a periodic box: a Fourier–Galerkin time stepper, the
//! Picard iteration of the mild map, and the existence dichotomy applied to
//! finished runs.

mod dichotomy;
mod galerkin;
mod picard;
mod run;

pub use dichotomy::{dichotomy_verdict, BoundCheck, DichotomyReport, SIMULATION_NOTE};
pub use galerkin::{Galerkin, Spectrum, PAIRS};
pub use picard::{
    duhamel_apply, duhamel_apply_with, picard_horizon, picard_solve, PicardConfig, PicardResult, Trajectory,
    DUHAMEL_TOLERANCE,
};
pub use run::{
    config_for, norm_discrepancy, spectral_run, spectral_run_with_state, Resample, RefinementLevel, RunManifest,
    RunStatus, Sample, SolverConfig, SolverRun,
};

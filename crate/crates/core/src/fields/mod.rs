//! Velocity fields on a periodic box standing in for `ℝ³`: sampling,
//! norms, rescaling and the scaling-invariant norm pair.

mod field;
mod grid;
pub mod io;
mod recipe;

pub use field::{leray_project, spectral_divergence_residual, GridField, NormReport, NORM_QUADRATURE};
pub use grid::{BoxGrid, DEFAULT_MAX_POINTS};
pub use recipe::{
    ln_q_pair_from_norms, paper_example, paper_phi, paper_psi, q_pair, rescale, sample_analytic, FieldRecipe,
    Sampler,
};

//! Heat kernels `G`, `G_j`, `G_klj`, their semigroups on periodic grids, the
//! Riesz transforms, and numerical checks of the linear estimates.

mod kernel;
mod lemma;
mod semigroup;

pub use kernel::{kernel_l1, kernel_sup, kernel_value, multiplier, KernelId};
pub use lemma::{
    band_radius, standard_recipes, sweep_grid, verify_lemma, verify_riesz, Estimate, LemmaCase, LemmaId,
    LemmaReport, SweepSpec, RESOLVE_CAP,
};
pub use semigroup::{
    apply_semigroup, apply_to_spectrum, check_wraparound, required_box_length, riesz_apply, riesz_spectrum,
    Method, SemigroupAction, DIRECT_MAX_N, WRAP_TOLERANCE,
};

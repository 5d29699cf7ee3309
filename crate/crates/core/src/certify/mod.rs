//! Regularity certificates for initial data: the `L^3` smallness test, the
//! scaling-invariant norm-pair test over an exponent grid, existence-time
//! brackets, and the decay and blow-up envelopes.

mod alpha;
mod bracket;
mod certificate;
mod checks;

pub use alpha::{example_norms, search_alpha_star, AlphaSearch};
pub use bracket::{
    blowup_constant, blowup_floor, decay_envelope, ln_t_lower, ln_t_upper, t_lower, t_upper, Envelope, EnvelopeKind,
    TimeBound, TimeBracket,
};
pub use certificate::{
    certificate_from_norms, decide, make_certificate, Certificate, ConstantsRef, FieldRecord, SearchConfig,
    Tolerances, Verdict, BRACKET_SEMANTICS, CERTIFICATE_FORMAT_VERSION, SOLENOIDAL_TOLERANCE,
};
pub use checks::{
    check_l3_from_norm, check_l3_smallness, check_norm_pair, check_norm_pair_from_norms, pair_outcome,
    BracketSummary, L3Check, NormEntry, NormPairCheck, NormSet, PairOutcome, BOUNDARY_BAND, EQUIVALENCE_TOLERANCE,
};

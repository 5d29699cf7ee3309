//! Constants of the regularity criteria: the Riesz multiplier constant
//! `C_∞` (computed numerically for a fixed cutoff) and the closed-form
//! kernel constants and thresholds built from it.

mod closed_form;
mod cutoff;
mod exponent;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use closed_form::*;
pub use cutoff::{compute_c_infty, refinement_table, rule_sums, CInfty, CutoffProfile, CutoffSpec, Rule, RuleSums};
pub use exponent::LebesgueExponent;

use crate::error::{domain, Result};
use crate::real::Real;

pub const CONSTANTS_FORMAT_VERSION: u32 = 1;

const GOLDEN: &str = include_str!("../../data/constants.json");

/// On-disk form of the constants context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsDocument {
    pub version: u32,
    pub cutoff: CutoffSpec<f64>,
    pub c_infty: f64,
    pub c_infty_error: f64,
    pub grid: GridRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub n: usize,
    pub half_width: f64,
    pub per_axis: [f64; 3],
    pub midpoint_value: f64,
    pub coarse_value: f64,
    pub refinements: Vec<RuleSums<f64>>,
}

/// `C_∞` together with the cutoff and refinement record it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsContext<T> {
    pub c_infty: T,
    pub c_infty_error: T,
    pub cutoff: CutoffSpec<T>,
    pub provenance: GridRecord,
}

impl<T: Real> ConstantsContext<T> {
    pub fn compute(cutoff: CutoffSpec<T>) -> Result<Self> {
        let c = compute_c_infty(&cutoff)?;
        let cast = |v: T| v.to_f64_lossy();
        let provenance = GridRecord {
            n: cutoff.n,
            half_width: cast(cutoff.half_width),
            per_axis: c.per_axis.map(cast),
            midpoint_value: cast(c.midpoint_value),
            coarse_value: cast(c.coarse_value),
            refinements: c
                .sums
                .iter()
                .map(|s| RuleSums {
                    n: s.n,
                    trapezoid: s.trapezoid.map(cast),
                    midpoint: s.midpoint.map(cast),
                })
                .collect(),
        };
        Ok(Self {
            c_infty: c.value,
            c_infty_error: c.error,
            cutoff,
            provenance,
        })
    }

    /// The checked-in constants for the default cutoff.
    pub fn golden() -> Self {
        Self::from_json(GOLDEN).expect("embedded constants file is valid")
    }

    /// A context with a prescribed `C_∞` and no refinement record.
    pub fn with_c_infty(c_infty: T) -> Self {
        let cutoff: CutoffSpec<T> = CutoffSpec::default();
        Self {
            c_infty,
            c_infty_error: T::zero(),
            provenance: GridRecord {
                n: cutoff.n,
                half_width: cutoff.half_width.to_f64_lossy(),
                per_axis: [c_infty.to_f64_lossy(); 3],
                midpoint_value: c_infty.to_f64_lossy(),
                coarse_value: c_infty.to_f64_lossy(),
                refinements: Vec::new(),
            },
            cutoff,
        }
    }

    pub fn document(&self) -> ConstantsDocument {
        let c = &self.cutoff;
        ConstantsDocument {
            version: CONSTANTS_FORMAT_VERSION,
            cutoff: CutoffSpec {
                profile: c.profile,
                smoothing: c.smoothing.to_f64_lossy(),
                n: c.n,
                half_width: c.half_width.to_f64_lossy(),
                tolerance: c.tolerance.to_f64_lossy(),
            },
            c_infty: self.c_infty.to_f64_lossy(),
            c_infty_error: self.c_infty_error.to_f64_lossy(),
            grid: self.provenance.clone(),
        }
    }

    pub fn from_document(doc: ConstantsDocument) -> Result<Self> {
        if doc.version != CONSTANTS_FORMAT_VERSION {
            return Err(domain(format!("unsupported constants version {}", doc.version)));
        }
        if !(doc.c_infty >= 0.0) || !doc.c_infty.is_finite() {
            return Err(domain("c_infty must be finite and nonnegative"));
        }
        let c = doc.cutoff;
        Ok(Self {
            c_infty: T::lit(doc.c_infty),
            c_infty_error: T::lit(doc.c_infty_error),
            cutoff: CutoffSpec {
                profile: c.profile,
                smoothing: T::lit(c.smoothing),
                n: c.n,
                half_width: T::lit(c.half_width),
                tolerance: T::lit(c.tolerance),
            },
            provenance: doc.grid,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.document()).expect("serializable");
        s.push('\n');
        s
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.document()).expect("serializable");
        Sha256::digest(bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn c4(&self, p: LebesgueExponent<T>) -> Result<T> {
        c4(p, self.c_infty)
    }

    pub fn c5(&self, p: LebesgueExponent<T>, q: LebesgueExponent<T>) -> Result<T> {
        c5(p, q, self.c_infty)
    }

    pub fn k0(&self, p: LebesgueExponent<T>, q: LebesgueExponent<T>) -> Result<T> {
        k0(p, q, self.c_infty)
    }

    pub fn ln_k0(&self, p: LebesgueExponent<T>, q: LebesgueExponent<T>) -> Result<T> {
        ln_k0(p, q, self.c_infty)
    }

    pub fn idc3p_threshold(&self, p: LebesgueExponent<T>) -> Result<T> {
        idc3p_threshold(p, self.c_infty)
    }

    pub fn nonlinear_factor(&self, p: LebesgueExponent<T>) -> Result<T> {
        nonlinear_factor(p, self.c_infty)
    }

    pub fn ln_nonlinear_factor(&self, p: LebesgueExponent<T>) -> Result<T> {
        ln_nonlinear_factor(p, self.c_infty)
    }
}

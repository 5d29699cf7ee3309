//! Explicit regularity criteria for 3D Navier-Stokes initial data.
//!
//! [`constants`] fixes `C_∞` and the derived constants, [`certify`] turns
//! measured norms into verdicts and time brackets, and [`mildsolve`] runs
//! the pseudo-spectral solver and the Picard iteration used to check them.

pub mod app;
pub mod bump;
pub mod certify;
pub mod constants;
pub mod error;
pub mod fields;
pub mod heatflow;
pub mod mildsolve;
pub mod quadrature;
pub mod real;
pub mod spectral;

pub use error::{Error, Result};
pub use real::Real;

/// Double-precision forms of the generic types.
pub type Exponent = constants::LebesgueExponent<f64>;
pub type Constants = constants::ConstantsContext<f64>;
pub type Grid = fields::BoxGrid<f64>;
pub type Field = fields::GridField<f64>;
pub type Bracket = certify::TimeBracket<f64>;
pub type Certificate = certify::Certificate<f64>;
pub type CertificateVerdict = certify::Verdict<f64>;
pub type Picard = mildsolve::PicardResult<f64>;

/// Version stamped into every emitted document.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

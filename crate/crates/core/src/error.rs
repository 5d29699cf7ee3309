use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("refinement did not converge: coarse value {coarse}, fine value {fine}")]
    Refinement { coarse: f64, fine: f64 },
    #[error("unknown sampler `{0}`")]
    UnknownSampler(String),
    #[error("box too small: edge length {actual} but at least {required} is needed")]
    BoxTooSmall { required: f64, actual: f64 },
    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),
    #[error("field is not divergence-free (residual {0:e})")]
    NotSolenoidal(f64),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("time grid too coarse: {0}")]
    Quadrature(String),
    #[error("picard iteration failed: {0}")]
    Picard(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Machine readable form of an [`Error`].
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Refinement { .. } => "refinement",
            Error::UnknownSampler(_) => "unknown_sampler",
            Error::BoxTooSmall { .. } => "box_too_small",
            Error::UnsupportedKernel(_) => "unsupported_kernel",
            Error::NotSolenoidal(_) => "not_solenoidal",
            Error::Invariant(_) => "invariant",
            Error::Config(_) => "config",
            Error::Quadrature(_) => "quadrature",
            Error::Picard(_) => "picard",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Toml(_) => "toml",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind(),
            message: self.to_string(),
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

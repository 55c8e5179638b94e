use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("spectral parameter lambda must be nonzero")]
    ZeroLambda,

    #[error("profile extends to {extent} in the {axis} variable, beyond the quadrature cutoff {cutoff}")]
    SupportExceedsCutoff {
        axis: &'static str,
        extent: f64,
        cutoff: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("atom construction infeasible: {0}")]
    Infeasible(String),

    #[error("empty spectral table")]
    EmptyTable,

    #[error("sigma = {sigma} lies outside the admissible window [{min}, {max})")]
    SigmaOutOfRange { sigma: f64, min: f64, max: f64 },

    #[error("divergent or non-finite direct norm")]
    DivergentNorm,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

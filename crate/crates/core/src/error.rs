use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subspace is not contained in the given ambient subspace (residual {residual:e})")]
    NotContained { residual: f64 },

    #[error("operator is singular or too ill-conditioned (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("witness vector lies in K1 (distance {distance:e}); it cannot certify non-closure")]
    NotAWitness { distance: f64 },

    #[error("subspace is not standard: {reason} (condition number {condition:e})")]
    NotStandard { reason: String, condition: f64 },

    #[error("support touches the time-grid boundary at t = {time}")]
    SupportAtBoundary { time: f64 },

    #[error("missing one-particle image for Weyl label")]
    MissingImage,

    #[error("malformed test-function data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

use thiserror::Error;

/// Errors surfaced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("beta = {beta} collides with eigenvalue {re:+e}{im:+e}i (distance {distance:.3e})")]
    EigenvalueCollision {
        beta: f64,
        re: f64,
        im: f64,
        distance: f64,
    },

    #[error("frequency gap hypothesis violated: {0}")]
    GapHypothesis(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix dimension {dim} exceeds eigensolver cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("linear algebra backend: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

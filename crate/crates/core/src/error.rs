use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty point set")]
    EmptySet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("nonlinear map evaluation failed: {0}")]
    Evaluation(String),

    #[error("series bound invalid: q = {q} >= 1")]
    Divergent { q: f64 },

    #[error("quadrature did not converge: node doubling changed entries by {change:e}")]
    QuadratureNonConvergence { change: f64 },

    #[error("instance too large for the brute-force oracle: {0}")]
    InstanceTooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy target not met (estimated error {estimate:e}): {context}")]
    Accuracy { estimate: f64, context: String },

    #[error("non-finite term at index {index}")]
    NonFinite { index: usize },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("triangular decomposition failed at order {order}")]
    Decomposition { order: usize },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Shared parameter checks.
pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= -1.0 {
        return domain(format!("alpha must be > -1 (got {alpha})"));
    }
    Ok(())
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta <= 0.0 {
        return domain(format!("theta must be > 0 (got {theta})"));
    }
    Ok(())
}

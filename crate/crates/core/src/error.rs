use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A point lies outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input data failed validation (negative weights, malformed rows, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A derived quantity (gradient, root, ...) could not be evaluated.
    #[error("analysis error: {0}")]
    Analysis(String),

    /// Monte-Carlo integration could not produce a trustworthy estimate.
    #[error("integration error: {0}")]
    Integration(String),

    /// An evaluation would overflow because the arguments touch the boundary.
    #[error("boundary contact: {0}")]
    BoundaryContact(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;

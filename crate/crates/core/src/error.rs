//! Error type shared by all modules.

/// Errors produced by the library.
///
/// The CLI maps these onto process exit codes: invalid input and invalid
/// coefficients exit with 2, singular operators and numerical failures
/// with 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("singular operator: {0}")]
    SingularOperator(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::SingularOperator(msg.into())
    }
}

use thiserror::Error;

/// Errors produced by the numeric pipeline and the CLI front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    /// A quadrature failed to reach its tolerance. `at` is the point (frequency,
    /// position or time) whose evaluation failed, `value`/`error_estimate` the
    /// best partial result.
    #[error("{what} did not converge at {at}: value {value:e} +/- {error_estimate:e}")]
    NonConvergence {
        what: String,
        at: f64,
        value: f64,
        error_estimate: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

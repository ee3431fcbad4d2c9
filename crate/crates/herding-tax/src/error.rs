//! Error type shared across the crate, with a stable mapping to process exit codes.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building models, running simulations, or
/// driving the command line.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter, configuration file, or command-line argument failed validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A mathematical guarantee the library promises (e.g. monotonicity of a
    /// coupled sweep) did not hold for a computed result.
    #[error("property violated: {0}")]
    PropertyViolation(String),

    /// A numeric evaluation left the representable range (e.g. overflow when
    /// exponentiating a log price). Never silently clipped.
    #[error("evaluation failed: {0}")]
    Evaluation(String),

    /// Reading or writing a file failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A configuration file could not be parsed as JSON.
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Io(std::io::Error::other(format!("csv: {other:?}"))),
        }
    }
}

impl Error {
    /// Process exit code for this error.
    ///
    /// `0` is success, `1` a violated property or failed evaluation, `2`
    /// invalid input, `3` an I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PropertyViolation(_) | Error::Evaluation(_) => 1,
            Error::InvalidInput(_) | Error::Parse(_) => 2,
            Error::Io(_) => 3,
        }
    }
}

/// Shorthand for building an [`Error::InvalidInput`].
pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

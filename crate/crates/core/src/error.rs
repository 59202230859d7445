use thiserror::Error;

/// Errors raised by the simulation, learning and I/O layers.
///
/// Every variant maps onto a stable machine-readable category (see
/// [`Error::category`]) which the command-line front end prints on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("body pose does not fit on the bed: {0}")]
    OutOfBed(String),

    #[error("reset failed after {attempts} attempts: {reason}")]
    ResetFailed { attempts: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidState(_) => "invalid-state",
            Error::OutOfBed(_) => "out-of-bed",
            Error::ResetFailed { .. } => "reset-failed",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn invalid_arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by configuration, parsing and I/O paths.
///
/// Policy evaluation itself is infallible; everything here originates from
/// user-supplied parameters or files.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("failed to parse {what}: {reason}")]
    Parse { what: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

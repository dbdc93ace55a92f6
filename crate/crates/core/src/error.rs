use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input value broke a documented constraint. `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// The caller broke an API contract (wrong strategy shape, non-terminal sequence, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("model `{model}` has a rank-deficient design matrix ({reason}); try the constant-only model")]
    Degenerate { model: String, reason: String },

    #[error("{}:{line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True for errors caused by bad input rather than the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::Contract(_)
                | Error::Degenerate { .. }
                | Error::Parse { .. }
                | Error::Json(_)
        )
    }
}

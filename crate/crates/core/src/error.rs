use thiserror::Error;

/// Errors surfaced by the library.
///
/// Validation failures carry the offending field path (for example
/// `interpreters[3].languages`) so that malformed instance files can be
/// reported precisely.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("unknown interpreter id `{0}`")]
    UnknownInterpreter(String),

    #[error("unknown patient id `{0}`")]
    UnknownPatient(String),

    #[error("duplicate pre-assignment target `{0}`")]
    DuplicatePreassignment(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("schedule uses interpreter `{0}` who is not hired")]
    UnhiredInterpreter(String),

    #[error("expected {expected} schedules, got {actual}")]
    CountMismatch { expected: usize, actual: usize },

    #[error("failed to parse {what}: {source}")]
    Parse {
        what: &'static str,
        #[source]
        source: serde_path_to_error::Error<serde_json::Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors that mean "too big for the exact solver".
    pub fn is_size_guard(&self) -> bool {
        matches!(self, Error::SizeGuard(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

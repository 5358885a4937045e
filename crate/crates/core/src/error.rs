use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input from the caller (bad vertex id, bad permutation, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input graph lacks a property the operation requires.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The data cannot support the requested test.
    #[error("CI test on ({x}, {y}) given {cond_size} variables failed: {reason}")]
    CiFailure {
        x: usize,
        y: usize,
        cond_size: usize,
        reason: String,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("no removable vertex among {remaining} remaining at iteration {iteration}")]
    NoRemovable { iteration: usize, remaining: usize },

    /// Internal bookkeeping disagrees with itself; indicates a bug or an
    /// inconsistent CI oracle.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }

    /// True for errors caused by the input data rather than by a bug.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::CiFailure { .. }
                | Error::DegenerateData(_)
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Io(_)
                | Error::NoRemovable { .. }
        )
    }
}

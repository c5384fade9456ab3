use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} exceeds capacity limit {max}")]
    Capacity {
        what: &'static str,
        value: u64,
        max: u64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exponent p = {0} outside [1, 2]")]
    ExponentOutOfRange(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("level {level} out of range {min}..={max}")]
    LevelOutOfRange { level: usize, min: usize, max: usize },

    #[error("embedding covers {found} vertices, graph has {expected}")]
    MissingCoordinates { expected: usize, found: usize },

    #[error("points {0} and {1} are mapped to the same image (infinite distortion)")]
    CoincidentImages(usize, usize),

    #[error("invariant violated: {0}")]
    Violation(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            Error::Violation(_)
            | Error::CoincidentImages(..)
            | Error::Internal(_) | Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}

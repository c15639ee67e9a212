use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),

    #[error("marking invariant violated: {0}")]
    MarkingInvariant(String),

    #[error("no exact goal value is available for this problem")]
    MissingGoalError,

    #[error("not enough usable data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

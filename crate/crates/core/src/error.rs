use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("index {index} out of range for {n} variables")]
    IndexOutOfRange { index: i64, n: usize },
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("variable {0} is unbounded")]
    Unbounded(usize),
    #[error("brute force limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("graph is locked")]
    Locked,
    #[error("graph is not locked")]
    NotLocked,
    #[error("edge violates graph rules: {0}")]
    BadEdge(String),
    #[error("negative variable index in permutation mode")]
    NegativeInPermutationMode,
    #[error("automorphism search exceeded node budget of {0}")]
    Budget(usize),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("unsupported constraint {0}")]
    Unsupported(usize),
    #[error("non-uniform column centers in column {0}")]
    NonUniformCenters(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid cycle notation: {0}")]
    Cycle(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CapError {
    #[error("unsupported dimension d = {0}; only d = 1, 2, 3 are supported")]
    Dimension(usize),

    #[error("invalid root cube: {0}")]
    Root(String),

    #[error("resolution too large: n*d = {bits} exceeds the configured limit {limit}")]
    Resolution { bits: u32, limit: u32 },

    #[error("leaf has no children")]
    LeafHasNoChildren,

    #[error("cube {0} does not lie in the root cube")]
    CubeOutOfRange(String),

    #[error("length mismatch: expected {expected} values, found {found}")]
    Length { expected: usize, found: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("negative value {value} at index {index}; use l1_norm for signed functions")]
    Negative { index: usize, value: f64 },

    #[error("beta must lie in (0, d]; got beta = {beta} with d = {d}")]
    Beta { beta: f64, d: usize },

    #[error("parameter error: {0}")]
    Param(String),

    #[error("parse error at line {line}, token {token}: {msg}")]
    Parse { line: usize, token: usize, msg: String },

    #[error("mismatched roots")]
    RootMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("postcondition violated: {0}")]
    Postcondition(String),

    #[error("zero seminorm")]
    ZeroSeminorm,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CapError>;

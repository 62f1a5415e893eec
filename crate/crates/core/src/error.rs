use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NonPositiveDefinite { pivot: usize, value: f64 },
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("line search found no sign change of the directional derivative after {doublings} doublings")]
    NoSignChange { doublings: usize },
    #[error("line search needs a descent direction, got slope {slope:e} at 0")]
    NotDescentDirection { slope: f64 },
    #[error("iteration cap of {cap} units exceeded")]
    CapExceeded { cap: usize },
    #[error("coordinate {coordinate}: smoothness estimate doubled {doublings} times without passing the sign test")]
    DoublingCapExceeded { coordinate: usize, doublings: usize },
    #[error("problem does not provide an exact block solver")]
    MissingBlockSolver,
    #[error("inner solver exceeded {cap} units without the accuracy certificate (L = {l:e}, attempt {attempt})")]
    InnerCapExceeded { cap: usize, l: f64, attempt: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("label {label} is not in {{-1, +1}} (row {row})")]
    MappedLabel { row: usize, label: f64 },

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("missing file: {0}")]
    MissingFile(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

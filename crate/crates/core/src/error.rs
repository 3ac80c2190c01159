use std::path::PathBuf;

use thiserror::Error;

/// Violations of the instance normalization rules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidInstance {
    #[error("instance has no items")]
    NoItems,
    #[error("instance has no constraint dimensions")]
    NoDimensions,
    #[error("a quadratic instance must have exactly one constraint, found {0}")]
    QuadraticDimensions(usize),
    #[error("dimension {dim}: expected {expected} weights, found {found}")]
    WeightRowLength { dim: usize, expected: usize, found: usize },
    #[error("expected {expected} profits, found {found}")]
    ProfitLength { expected: usize, found: usize },
    #[error("dimension {dim}: capacity must be positive")]
    ZeroCapacity { dim: usize },
    #[error("dimension {dim}: weight {weight} of item {item} exceeds capacity {capacity} (max_m w_m <= c violated)")]
    WeightExceedsCapacity { dim: usize, item: usize, weight: u64, capacity: u64 },
    #[error("dimension {dim}: capacity {capacity} is not below total weight {total} (c < sum_m w_m violated)")]
    CapacityNotBinding { dim: usize, capacity: u64, total: u64 },
    #[error("profit matrix is not symmetric at ({row}, {col}): {upper} != {lower}")]
    AsymmetricProfit { row: usize, col: usize, upper: u64, lower: u64 },
    #[error("numeric overflow while {0}")]
    Overflow(&'static str),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(#[from] InvalidInstance),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{0}")]
    Input(String),

    #[error("refusing exhaustive enumeration of {n} items (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("relative gap is undefined for a zero objective")]
    UndefinedGap,

    #[error("trace row {row}: {message}")]
    Trace { row: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("cost model: {0}")]
    CostModel(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

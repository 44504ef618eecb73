use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("EBOM requires an even dimension, got {0}")]
    OddDimension(usize),

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("population is empty")]
    EmptyPopulation,

    #[error("position {0} is out of range for dimension {1}")]
    PositionOutOfRange(usize, usize),

    #[error("conditioning position must differ from the target position ({0})")]
    SamePosition(usize),

    #[error("cannot select {mu} members from a population of {size}")]
    SelectionTooLarge { mu: usize, size: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("not a valid permutation of 1..={0}")]
    InvalidPermutation(usize),

    #[error("permutation does not pair EBOM blocks")]
    IncorrectPermutation,

    #[error("rank {0} does not start a pair (pairs start at odd ranks)")]
    NotPairStart(usize),

    #[error("bit string is not an EBOM optimum")]
    NotOptimum,

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}

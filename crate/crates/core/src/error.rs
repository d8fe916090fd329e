use thiserror::Error;

use crate::hilbert::FieldTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spanning set is numerically zero")]
    EmptySpan,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("field mismatch: expected {expected:?}, found {found:?}")]
    FieldMismatch { expected: FieldTag, found: FieldTag },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("family is not a fusion frame (lower frame bound {lower_bound:.3e})")]
    NotAFrame { lower_bound: f64 },

    #[error("exact enumeration of 2^{m} subsets exceeds the cap of 2^{cap}")]
    SubsetBudgetExceeded { m: usize, cap: usize },

    #[error("member {index} spans a {dim}-dimensional subspace; complement property needs 1-dimensional members")]
    NotOneDimensional { index: usize, dim: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("every sampled pair had a vanishing bracket")]
    DegenerateSamples,

    #[error("cannot build a tight family: {0}")]
    ConstructionFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid {block} entry {index}: {reason}")]
    Validation {
        block: String,
        index: usize,
        reason: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

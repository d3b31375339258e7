use thiserror::Error;

use crate::matcsv::CsvError;
use crate::pgm::PgmError;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is not positive semidefinite within tolerance")]
    NotPsd,

    #[error("vectors are not orthonormal")]
    NotOrthonormal,

    #[error("eigensolver did not converge")]
    EigenNonConvergence,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("all-zero coefficient vector has no energy distribution")]
    ZeroEnergy,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Pgm(#[from] PgmError),

    #[error(transparent)]
    Csv(#[from] CsvError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

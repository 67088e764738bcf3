//! Computer algebra for quivers with potential.

pub mod cli;
pub mod corpus;
pub mod dgmod;
pub mod field;
pub mod format;
pub mod ginzburg;
pub mod homology;
pub mod linalg;
pub mod mutation;
pub mod ncseries;
pub mod qp;
pub mod server;

use ncseries::SeriesError;
use qp::QpError;

/// Errors raised by the algebra layers above `qp`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("not a right-equivalence: {0}")]
    NotARightEquivalence(String),
    #[error("insufficient truncation: order {requested} needs a differential exact to length {needed}, have {available}")]
    InsufficientTruncation { requested: usize, needed: usize, available: usize },
    #[error("{0}")]
    Invalid(String),
}

impl From<SeriesError> for Error {
    fn from(e: SeriesError) -> Self {
        Error::Qp(QpError::Series(e))
    }
}

use thiserror::Error;

use crate::mi::MiResult;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// The refinement budget ran out; `best` holds the last estimate.
    #[error("integration did not converge after {refinements} refinements (best estimate {:.12} bits, error {:.3e})", best.bits_per_nd_use, best.error_estimate)]
    NonConvergence { refinements: usize, best: MiResult },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

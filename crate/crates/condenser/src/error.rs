use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// `Rejection` marks invalid input (a violated precondition), which is
/// distinct from a legitimate infinite capacity result. `NonConvergence`
/// carries the last iterate so a caller can inspect how far the solver got.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected: {0}")]
    Rejection(String),

    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        last: Vec<f64>,
    },

    #[error("internal consistency: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn reject<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Rejection(msg.into()))
}

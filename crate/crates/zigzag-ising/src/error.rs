use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle theta_{index} = {value} is outside (0, pi/2)")]
    Angle { index: usize, value: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("eigensolver did not converge after {iterations} iterations")]
    Eigensolver { iterations: usize },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("no convergence at N = {truncation}: last iterates {previous} and {last}")]
    Convergence {
        truncation: usize,
        previous: f64,
        last: f64,
    },
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Angle { .. }
            | Error::Domain(_)
            | Error::Shape(_)
            | Error::Size(_)
            | Error::Precondition(_) => 2,
            Error::Eigensolver { .. } | Error::Numeric(_) | Error::Convergence { .. } => 3,
            Error::Consistency(_) | Error::Invariant(_) => 4,
        }
    }
}

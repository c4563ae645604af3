use alloc::string::String;

/// Errors raised across the estimation, allocation and analysis layers.
///
/// Solver outcomes such as infeasibility are normally reported through
/// [`crate::lp::Status`]; an `Error` means the request itself could not be
/// carried out.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("lookup error: {0}")]
    Lookup(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("undefined quantity: {0}")]
    Undefined(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

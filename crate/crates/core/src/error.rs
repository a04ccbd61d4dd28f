//! Error type shared across the library.

use std::fmt;

/// Errors produced by solver, operator and harness routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input or intermediate value contained NaN/Inf where a finite
    /// value is required.
    NonFinite(&'static str),
    /// A vector or matrix had the wrong length for the requested operation.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A parameter violated its documented range.
    InvalidParam(String),
    /// An operator evaluation overflowed to a non-finite value.
    DivergedEvaluation(&'static str),
    /// The current iterate is exactly zero; the caller must take the
    /// zero-iterate branch instead of the gradient-based one.
    ZeroIterate(&'static str),
    /// Every point probed by the line search had a non-finite objective.
    LineSearchDiverged,
    /// Every regularization parameter tried by the discrepancy search
    /// produced a diverged solve.
    AllTrialsDiverged,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, got {got}"),
            Error::InvalidParam(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DivergedEvaluation(what) => {
                write!(f, "evaluation of {what} diverged to a non-finite value")
            }
            Error::ZeroIterate(what) => {
                write!(f, "{what} is undefined at the zero iterate")
            }
            Error::LineSearchDiverged => {
                write!(f, "objective non-finite at every line-search grid point")
            }
            Error::AllTrialsDiverged => {
                write!(f, "all discrepancy-principle trials diverged")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

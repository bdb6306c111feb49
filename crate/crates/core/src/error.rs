use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::kernels::PathSample;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("birth-death path not absorbed (time {time}, {jumps} jumps)")]
    NonAbsorbed { time: f64, jumps: u64, partial: PathSample },
    #[error("{0}")]
    Truncation(Box<TruncationFailure>),
    #[error("replicate {index}: {source}")]
    Replicate { index: usize, source: Box<Error> },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("test undefined: {0}")]
    UndefinedTest(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Innermost error, looking through replicate wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Replicate { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationReason {
    /// The kernel's expected tail mass is infinite; no window is large enough.
    InfiniteTail,
    /// The window hit its point budget before the bound fell below tolerance.
    PointBudget,
    /// The window half-width hit its configured maximum.
    WidthLimit,
}

/// Failure of the adaptive stationary truncation, carrying the best partial result.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("stationary truncation failed ({reason:?}): tail bound {bound:e} vs tolerance {tol:e} at c = {c}")]
pub struct TruncationFailure {
    pub reason: TruncationReason,
    pub values: Vec<f64>,
    pub bound: f64,
    pub tol: f64,
    pub c: f64,
    pub points: usize,
}

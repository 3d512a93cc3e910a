use std::io;

use thiserror::Error;

/// Errors produced by the library and the command line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vector: a probability vector needs at least one entry")]
    EmptyVector,
    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entry {index} is not finite ({value})")]
    NonFiniteEntry { index: usize, value: f64 },
    #[error("entries sum to {sum}, outside 1 +/- {tolerance}")]
    SumOutOfTolerance { sum: f64, tolerance: f64 },
    #[error("entries sum to zero; cannot normalize")]
    ZeroSum,
    #[error("declared k = {declared} but {actual} entries given")]
    DeclaredDimension { declared: usize, actual: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("candidate is not on the probability simplex: {0}")]
    NotOnSimplex(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("bad target dimension {target} for a vector of dimension {k}")]
    BadTargetDimension { target: usize, k: usize },
    #[error("wasserstein order q must be >= 1, got {0}")]
    BadWassersteinOrder(f64),
    #[error("unknown distance `{0}`")]
    UnknownDistance(String),
    #[error("{operation} is not defined for the {kind} distance")]
    UnsupportedDistance {
        operation: &'static str,
        kind: String,
    },
    #[error("epsilon = {0} is out of range")]
    EpsilonOutOfRange(f64),
    #[error("adversary changed {changed} observations but the budget is {budget}")]
    BudgetViolation { changed: usize, budget: usize },
    #[error("invalid `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("rate fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),
    #[error("rate fit needs positive values, got {value} at sweep value {at}")]
    NonpositiveError { at: f64, value: f64 },
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Whether the error stems from bad input (exit code 2) rather than a
    /// failure while running (exit code 1).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::BudgetViolation { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("potential has no atoms")]
    EmptyRepresentation,

    #[error("covariance matrix is not symmetric positive definite")]
    NotSpd,

    #[error("{0}")]
    InvalidSchedule(String),

    #[error("unsupported cost kind: {0}")]
    UnsupportedCost(String),

    #[error("{op} supports dimensions 1..={max}, got {got}")]
    UnsupportedDimension {
        op: &'static str,
        max: usize,
        got: usize,
    },

    #[error("measure weight {weight} at atom {index} exceeds the admissible bound 1 + 1e-6")]
    WeightOutOfRange { index: usize, weight: f64 },

    #[error("phi underflow at atom {index}: log phi = {log_phi} (below -700)")]
    PhiUnderflow { index: usize, log_phi: f64 },

    #[error("insufficient data for {what}: need {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

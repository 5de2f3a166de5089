use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid density: value {value} at x = {at}")]
    InvalidDensity { at: f64, value: f64 },
    #[error("precision exhausted: {bits} bits exceeds the configured bound of {limit}")]
    PrecisionExhausted { bits: u64, limit: u64 },
    #[error("kernel singularity at x = {x}, y = {y}")]
    KernelSingularity { x: String, y: String },
    #[error("degenerate bimoment matrix at order {order}")]
    Degenerate { order: usize },
    #[error("theory violation: {0}")]
    TheoryViolation(String),
    #[error("order underflow: need order {needed}, have {available}")]
    OrderUnderflow { needed: usize, available: usize },
    #[error("pole/cut evaluation at {0}")]
    PoleEvaluation(String),
    #[error("normalization needs sqrt(h_{index}), which is irrational")]
    IrrationalNormalization { index: usize },
    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),
    #[error("jump check requires density measure")]
    RequiresDensity,
    #[error("point {0} is not interior to the support")]
    NotInSupport(f64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

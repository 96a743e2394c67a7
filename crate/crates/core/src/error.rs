use thiserror::Error;

/// Errors raised by the core numerics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid contraction pattern {indices:?} for length {n}: {reason}")]
    InvalidPattern {
        n: usize,
        indices: Vec<usize>,
        reason: &'static str,
    },

    #[error("dimension mismatch at level {level}: expected {expected}, got {got}")]
    DimensionMismatch {
        level: usize,
        expected: usize,
        got: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    EigenNotConverged { iterations: usize, residual: f64 },

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolveNotConverged { iterations: usize, residual: f64 },

    #[error("near-singular resolvent: smallest shift {shift:.3e} below threshold {threshold:.3e}")]
    NearSingular { shift: f64, threshold: f64 },

    #[error("dressing undefined: alpha(k) = {alpha:.3e} <= 0 for mode {mode}")]
    DressingUndefined { mode: usize, alpha: f64 },

    #[error("mode {mode} outside grid of {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("finite-difference step {step:.3e} leaves the admissible momentum set")]
    StepOutsideDomain { step: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

use alloc::string::String;

/// Errors produced by the solver, the problems and the oracle.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("truncated series degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("singular jet: constant term is zero")]
    SingularJet,

    #[error("invalid length: expected {expected}, found {found}")]
    InvalidLength { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite coefficients produced in pass {pass}")]
    Divergence { pass: usize },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("no reference sample at t = {t}")]
    TimeMismatch { t: f64 },

    #[error("singular position: zero radius")]
    SingularPosition,

    #[error("unsupported orbit: h = {h} must be positive")]
    UnsupportedOrbit { h: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = core::result::Result<T, Error>;

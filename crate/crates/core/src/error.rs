use thiserror::Error;

use crate::copula::GridCheckReport;

pub type Result<T> = std::result::Result<T, TfError>;

#[derive(Debug, Error, Clone)]
pub enum TfError {
    #[error("value {0} lies outside [0, 1]")]
    OutOfUnitRange(f64),

    #[error("{family}: parameter {param}={value} outside domain ({domain})")]
    ParameterDomain { family: &'static str, param: &'static str, value: f64, domain: &'static str },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("map is not a member of {class}: {reason}")]
    NotMember { class: &'static str, reason: String },

    #[error("copula is not exchangeable (max asymmetry {0:e})")]
    NotExchangeable(f64),

    #[error("validation failed: {condition}")]
    ValidationFailed { condition: String, report: Box<GridCheckReport> },

    #[error("point ({u}, {v}) lies outside S1 (transform at or below phi(0))")]
    OutsideS1 { u: f64, v: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("quadrature did not converge (error estimate {estimate:e}, tolerance {tolerance:e})")]
    QuadratureNonconvergence { estimate: f64, tolerance: f64 },

    #[error("conditional inversion failed at u={u}, p={p}: {reason}")]
    InversionFailure { u: f64, p: f64, reason: String },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("tail case mismatch: {0}")]
    CaseMismatch(String),

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("mismatched shared component: {0}")]
    MismatchedComponent(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

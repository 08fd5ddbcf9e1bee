use thiserror::Error;

/// Why an objective evaluation was refused.
///
/// A halt is not a failure: solvers treat it as a normal termination signal
/// and report the best point found so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Halt {
    /// The run-wide evaluation cap is spent.
    EvalBudget,
    /// The wall-clock deadline has passed.
    TimeBudget,
    /// A previous evaluation already reached the target accuracy.
    Target,
    /// A temporary cap installed for a nested solve (one subproblem) is spent.
    SubBudget,
}

/// Failure of a single counted evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("evaluation halted: {0:?}")]
    Halted(Halt),
    #[error("objective returned non-finite value {value} at {x:?}")]
    NonFinite { value: f64, x: Vec<f64> },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("point component {index} = {value} lies outside the unit interval")]
    OutsideUnitCube { index: usize, value: f64 },
    #[error("objective returned non-finite value {value} at {x:?}")]
    NonFinite { value: f64, x: Vec<f64> },
    #[error("unknown test function `{name}`; valid names: {valid}")]
    UnknownFunction { name: String, valid: String },
    #[error("dimension {dim} is not allowed for {name}; allowed: {allowed}")]
    InvalidDimension {
        name: String,
        dim: usize,
        allowed: String,
    },
    #[error("registry validation failed for {name} (n = {dim}): {detail}")]
    Validation {
        name: String,
        dim: usize,
        detail: String,
    },
}

impl Error {
    /// True for errors caused by user-supplied settings rather than by the objective.
    pub fn is_configuration(&self) -> bool {
        !matches!(self, Error::NonFinite { .. } | Error::Validation { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

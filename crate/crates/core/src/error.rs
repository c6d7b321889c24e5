//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by any pipeline stage.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: dimension mismatches, invalid flags, bad counts.
    #[error("input error: {0}")]
    Input(String),

    /// Numerical breakdown inside the solver (pivot collapse, singular basis).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A feasibility query came back empty.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An optimization problem or set is unbounded where boundedness was required.
    #[error("unbounded: {0}")]
    Unbounded(String),

    /// A model failed validation; names the violating component.
    #[error("model invalid: {0}")]
    ModelInvalid(String),

    /// Node or iteration budget exhausted; carries the best incumbent seen.
    #[error("resource limit: {message} (incumbent {incumbent:?}, bound {bound})")]
    Budget {
        message: String,
        /// Objective of the best integer-feasible point found, if any.
        incumbent: Option<f64>,
        /// Best proven lower bound at the moment the budget ran out.
        bound: f64,
    },

    /// File could not be parsed; includes the path to the offending field.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Two supposedly equivalent computations disagreed.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Errors produced by benchmark generation, retrieval, training, evaluation,
/// and curve fitting.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A configuration field is out of bounds; names the offending field.
    Config { field: &'static str, message: String },
    /// Vector or matrix dimensions do not match.
    Shape { expected: usize, got: usize },
    /// A referenced entity (doc id, query id) does not exist.
    Lookup { what: String },
    /// An argument violates an operation's contract.
    Argument { message: String },
    /// A precondition on the input data is not satisfied.
    Precondition { message: String },
    /// Training produced a non-finite loss at the given step.
    Training { step: u64, message: String },
    /// Curve fitting could not produce a usable fit.
    Fit { message: String },
    /// Input data is inconsistent (missing runs, ragged grids, bad records).
    Data { message: String },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Config { field, message } => {
                write!(f, "configuration error in `{field}`: {message}")
            }
            CoreError::Shape { expected, got } => {
                write!(f, "shape error: expected dimension {expected}, got {got}")
            }
            CoreError::Lookup { what } => write!(f, "lookup error: unknown {what}"),
            CoreError::Argument { message } => write!(f, "argument error: {message}"),
            CoreError::Precondition { message } => write!(f, "precondition error: {message}"),
            CoreError::Training { step, message } => {
                write!(f, "training error at step {step}: {message}")
            }
            CoreError::Fit { message } => write!(f, "fit error: {message}"),
            CoreError::Data { message } => write!(f, "data error: {message}"),
        }
    }
}

impl core::error::Error for CoreError {}

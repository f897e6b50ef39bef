//! Error type shared across the solver stack.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VortexError {
    /// A configuration field failed validation.
    #[error("config error in `{field}`: {message}")]
    Config { field: &'static str, message: String },

    /// An input lies outside the domain of the operation (wrong grid,
    /// nonzero mean where a mean-free field is required, parameter out
    /// of range).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced non-finite values or detected a step-size
    /// instability.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An iteration failed to reach its tolerance.
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl VortexError {
    pub fn config(field: &'static str, message: impl Into<String>) -> Self {
        VortexError::Config {
            field,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        VortexError::Domain(message.into())
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        VortexError::Numeric(message.into())
    }
}

pub type Result<T> = std::result::Result<T, VortexError>;

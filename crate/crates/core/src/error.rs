use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance generation failed after {attempts} disconnected samples")]
    GenerationFailure { attempts: u32 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("infeasible instance: {0}")]
    InfeasibleInstance(String),

    #[error("game infeasible: {0}")]
    GameInfeasible(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("time limit exceeded")]
    Timeout,

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

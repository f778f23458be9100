use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge (value {value}, achieved error {achieved:e})")]
    NonConvergence { value: f64, achieved: f64 },
    #[error("root bracketing failed: {0}")]
    Bracket(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Coarse error classes shared by the service protocol and the CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Config,
    Convergence,
    Infeasible,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Convergence => 3,
            ErrorKind::Infeasible => 4,
        }
    }
}

impl Error {
    /// Domain errors reaching a caller come from parameter values, so they class as config errors.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Domain(_) => ErrorKind::Config,
            Error::NonConvergence { .. } | Error::Bracket(_) => ErrorKind::Convergence,
            Error::Infeasible(_) => ErrorKind::Infeasible,
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

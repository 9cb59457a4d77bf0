use birnbaum_core::{FreqError, MethodError, ModelError, RelationError, StatisticsError};
use thiserror::Error;

use crate::workspace::WorkspaceError;

/// Exit status 1: the request was well-formed but the domain refused it.
pub const EXIT_DOMAIN: i32 = 1;
/// Exit status 2: malformed command line.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Error)]
#[error("error[{code}]: {message}")]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    pub fn domain(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
            exit: EXIT_DOMAIN,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: "USAGE".to_string(),
            message: message.into(),
            exit: EXIT_USAGE,
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::domain(e.code(), e.to_string())
            }
        }
    )*};
}

domain_from!(ModelError, StatisticsError, RelationError, MethodError, FreqError);

impl From<WorkspaceError> for CliError {
    fn from(e: WorkspaceError) -> Self {
        let message = match e.detail_code() {
            Some(detail) => format!("{detail} at {e}"),
            None => e.to_string(),
        };
        CliError::domain(e.code(), message)
    }
}

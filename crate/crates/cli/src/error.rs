use std::path::PathBuf;

use combpulse_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid value at `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("unknown preset `{0}` (run `combpulse list`)")]
    UnknownPreset(String),

    #[error("cannot read {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },

    #[error("{context}: {source}")]
    Numerical { context: String, source: CoreError },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Wraps a library error raised while evaluating the config section at
    /// `context`.
    pub fn from_core(context: &str, source: CoreError) -> Self {
        match source {
            CoreError::InvalidParameter { field, reason } => CliError::Invalid {
                field: format!("{context}.{field}"),
                reason,
            },
            source => CliError::Numerical {
                context: context.to_string(),
                source,
            },
        }
    }

    /// 2 for anything wrong with the request, 3 when the numerics could not
    /// reach the requested accuracy, 1 for output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. }
            | CliError::Invalid { .. }
            | CliError::UnknownPreset(_)
            | CliError::ReadConfig { .. } => 2,
            CliError::Numerical { source, .. } => match source {
                CoreError::NotConverged { .. } | CoreError::SidebandLimit { .. } => 3,
                _ => 2,
            },
            CliError::Write { .. } => 1,
        }
    }
}

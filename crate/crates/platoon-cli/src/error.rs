//! CLI error type with the exit-code contract: 0 success, 2 configuration
//! error, 3 numeric failure, 4 measurement infeasible.

use platoon_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("measurement infeasible: {0}")]
    Measurement(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numeric(_) => 3,
            CliError::Measurement(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::MeasurementInfeasible(_) => CliError::Measurement(e.to_string()),
            CoreError::Numeric { .. } | CoreError::NonFinite { .. } => {
                CliError::Numeric(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

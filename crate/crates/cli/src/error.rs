use lpa::LpaError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lpa(#[from] LpaError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Output(String),
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Lpa(e) => e.code(),
            CliError::Io(_) => "io",
            CliError::Output(_) => "output",
        }
    }

    /// 2 configuration, 3 invalid input, 4 numerical failure, 5 io.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Lpa(e) => match e {
                LpaError::Convergence { .. } | LpaError::Instability(_) | LpaError::Truncation { .. } => 4,
                _ => 3,
            },
            CliError::Io(_) | CliError::Output(_) => 5,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord { code: self.code().to_string(), message: self.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

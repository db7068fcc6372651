use std::io;

use serde::Serialize;

/// Failure of a subcommand, classified for the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] ctfield::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: String,
}

impl CliError {
    /// 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            CliError::Core(e) if !e.is_input_error() => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        if self.exit_code() == 3 {
            "numerical"
        } else {
            "config"
        }
    }

    /// Single-line JSON for standard error.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&ErrorLine { error: self.kind(), message: self.to_string() })
            .unwrap_or_else(|_| String::from("{\"error\":\"config\",\"message\":\"unprintable error\"}"))
    }
}

pub(crate) fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

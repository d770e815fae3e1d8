use std::fmt::Display;

/// Exit codes of the `alr` binary.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const RUNTIME: u8 = 1;
    pub const BORDERLINE: u8 = 2;
    pub const INDETERMINATE: u8 = 3;
    /// A rate fit exceeded the residual threshold under `--strict`.
    pub const UNRELIABLE: u8 = 4;
    /// Bad command line, data spec or config syntax.
    pub const USAGE: u8 = 64;
    /// Well-formed input with physically invalid parameters.
    pub const INVALID: u8 = 65;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] alr_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn invalid(msg: impl Display) -> Self {
        CliError::Invalid(msg.to_string())
    }

    pub fn io(context: impl Display, source: std::io::Error) -> Self {
        CliError::Io { context: context.to_string(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Invalid(_) => exit::INVALID,
            _ => exit::RUNTIME,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

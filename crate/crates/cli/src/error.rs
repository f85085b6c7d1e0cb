use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] scenario_cert::Error),

    #[error("configuration error: {0}")]
    Config(String),

    /// A saved result did not survive re-checking.
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Core(e) if e.is_configuration() => 2,
            CliError::Core(_) => 3,
            CliError::Config(_) => 2,
            CliError::Validation(_) => 1,
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible optimization: {0}")]
    Infeasible(String),
    #[error("theory/simulation acceptance failed: {0}")]
    Acceptance(String),
    #[error(transparent)]
    Core(#[from] tbe_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(tbe_core::Error::Config(_)) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Acceptance(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

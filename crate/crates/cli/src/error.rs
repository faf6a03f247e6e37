use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed config: {0}")]
    Config(String),
    #[error("unknown experiment `{0}` (see `qnmlab list`)")]
    UnknownExperiment(String),
    #[error("invalid scheme/attack combination: {0}")]
    InvalidCombination(String),
    #[error("numerical failure: {0}")]
    Core(#[from] qnmlab_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::UnknownExperiment(_) => 3,
            CliError::InvalidCombination(_) => 4,
            CliError::Core(_) => 5,
            CliError::Output(_) => 6,
        }
    }
}

/// Exit code when every experiment ran but some check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;

use stixel_core::StixelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Data(#[from] StixelError),

    #[error("{0}")]
    Check(String),
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Data(StixelError::InvalidParam { .. }) => 1,
            CliError::Data(_) | CliError::Check(_) => 2,
        }
    }
}

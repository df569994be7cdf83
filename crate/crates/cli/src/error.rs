// SPDX-License-Identifier: Apache-2.0

use qthermal_core::Error as CoreError;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{failed} of {total} grid points failed")]
    FailedRows { failed: usize, total: usize },
}

impl CliError {
    pub const USAGE: i32 = 1;
    pub const NUMERICAL: i32 = 2;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } => Self::USAGE,
            CliError::Core(e) if e.is_config_error() => Self::USAGE,
            CliError::Core(CoreError::Csv(_)) => Self::USAGE,
            CliError::Core(_) | CliError::FailedRows { .. } => Self::NUMERICAL,
        }
    }
}

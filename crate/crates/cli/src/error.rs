use std::path::PathBuf;

use tps_core::TpsError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] TpsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} self-check(s) failed")]
    Selftest(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for configuration problems, 2 for data problems, 3 for failed self-checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) if e.is_data_error() => 2,
            CliError::Core(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Selftest(_) => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

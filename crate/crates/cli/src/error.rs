use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or out-of-domain configuration.
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] qpt_core::Error),

    /// A CSV file that does not follow the table layout.
    #[error("malformed table: {0}")]
    Table(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for usage, configuration, domain and cross-phase errors, 3 for
    /// resource caps, 4 for numeric and fit failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        use qpt_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Input(_) | E::Domain(_) | E::CrossPhase { .. }) => 2,
            CliError::Core(E::Resource(_)) => 3,
            CliError::Core(E::Numeric(_) | E::Fit { .. }) => 4,
            CliError::Table(_) | CliError::Io { .. } => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

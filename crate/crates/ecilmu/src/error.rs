use std::path::{Path, PathBuf};

/// Failures surfaced by the file layer and the command-line driver.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Engine(#[from] ecilmu_core::Error),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: ecilmu_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin} line {line}: {reason}")]
    Config {
        origin: String,
        line: usize,
        reason: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Conflict(String),

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn file(path: &Path, source: ecilmu_core::Error) -> Self {
        CliError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Stable category printed as `error[category]: ...`.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Engine(e) | CliError::File { source: e, .. } => e.category(),
            CliError::Io { .. } => "io",
            CliError::Config { .. } => "config",
            CliError::Usage(_) => "usage",
            CliError::Conflict(_) => "conflict",
            CliError::Csv { .. } => "csv",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

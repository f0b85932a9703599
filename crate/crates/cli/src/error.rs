use thiserror::Error;

/// Failure classes, mapped to process exit codes by the binary.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical accuracy failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Core(adqc_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Core(adqc_core::Error::Io(_)) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(adqc_core::Error::UndefinedImbalance(_)) => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<adqc_core::Error> for CliError {
    fn from(e: adqc_core::Error) -> Self {
        CliError::Core(e)
    }
}

use thiserror::Error;

/// Failure of a CLI run, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration, bad input values.
    #[error("configuration error: {0}")]
    Config(String),
    /// The computation itself failed (singular information, failed fit,
    /// replay mismatch).
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<superres_core::Error> for CliError {
    fn from(e: superres_core::Error) -> Self {
        use superres_core::Error as E;
        match e {
            E::InvalidInput { .. } | E::Domain { .. } | E::SingularSpacing { .. } | E::Precondition(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

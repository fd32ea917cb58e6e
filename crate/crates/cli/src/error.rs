use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("protocol integrity failure: {0}")]
    Integrity(String),
}

impl CliError {
    /// Process exit code: 1 for I/O, 2 for configuration, 3 for integrity.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Integrity(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Errors raised while building a run from its inputs are configuration errors.
pub(crate) fn config_error(e: parity_teleport::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Errors raised while executing a validated run.
impl From<parity_teleport::Error> for CliError {
    fn from(e: parity_teleport::Error) -> Self {
        use parity_teleport::Error as E;
        match e {
            E::ProtocolIntegrity(_)
            | E::ConventionInconsistency(_)
            | E::Wiring(_)
            | E::SupportOverflow { .. } => CliError::Integrity(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

use std::path::PathBuf;

use anchorplay_core::audit::AuditError;
use thiserror::Error;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },
    #[error("bad --set {arg:?}: {msg}")]
    Override { arg: String, msg: String },
    #[error("{0}")]
    Config(String),
    #[error("hard invariant breached: {0}")]
    Breach(String),
    #[error("trace check failed: {0}")]
    Audit(#[from] AuditError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Write { .. } => EXIT_IO,
            CliError::Parse { .. } | CliError::Override { .. } | CliError::Config(_) => EXIT_CONFIG,
            CliError::Breach(_) => EXIT_INVARIANT,
            CliError::Audit(AuditError::Io(_)) => EXIT_IO,
            CliError::Audit(AuditError::Malformed { .. }) => EXIT_CONFIG,
            CliError::Audit(_) => EXIT_INVARIANT,
        }
    }
}

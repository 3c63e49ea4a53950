use std::fmt;
use std::process::ExitCode;

use vizcat_core::catalog::CatalogError;
use vizcat_core::packager::PackageError;
use vizcat_core::runner::RunError;

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    NotFound(String),
    Conflict(String),
    MissingRuntime(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Validation(_) => 1,
            Self::NotFound(_) => 2,
            Self::Conflict(_) => 3,
            Self::MissingRuntime(_) => 4,
            Self::Internal(_) => 5,
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) | Self::Conflict(m) | Self::MissingRuntime(m) | Self::Internal(m) => f.write_str(m),
            Self::NotFound(m) => write!(f, "not found: {m}"),
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::RootNotFound(_) => Self::NotFound(e.to_string()),
            CatalogError::InvalidRecord { .. } => Self::Validation(e.to_string()),
            _ => Self::Internal(e.to_string()),
        }
    }
}

impl From<PackageError> for Failure {
    fn from(e: PackageError) -> Self {
        match e {
            PackageError::CapabilityMismatch(_)
            | PackageError::InvalidConfig { .. }
            | PackageError::OutDirNotEmpty(_) => Self::Conflict(e.to_string()),
            PackageError::InvalidRecord(_) | PackageError::Io { .. } => Self::Internal(e.to_string()),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::MissingRuntime(_) => Self::MissingRuntime(e.to_string()),
            RunError::Busy(_) | RunError::UnsupportedScript { .. } => Self::Conflict(e.to_string()),
            RunError::Bundle(inner) => inner.into(),
            RunError::SpawnFailure { .. } => Self::Internal(e.to_string()),
        }
    }
}

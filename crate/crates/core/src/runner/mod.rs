//! Runtime detection and bundle execution.

mod execute;
mod probe;
mod transcript;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::packager::PackageError;

pub use execute::{execute, RunOutcome, Runner, LOCK_FILE, STDERR_LOG, STDOUT_LOG};
pub use probe::{parse_version, probe_runtimes, probe_runtimes_in, RuntimeProbe, ToolStatus};
pub use transcript::{parse_script, Command};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("MissingRuntime: `{0}` was not found on the search path")]
    MissingRuntime(String),
    #[error("failed to spawn {}: {source}", path.display())]
    SpawnFailure { path: PathBuf, source: io::Error },
    #[error("bundle is already running (lock file {} exists)", .0.display())]
    Busy(PathBuf),
    #[error("cannot parse generated script line {line}: `{text}`")]
    UnsupportedScript { line: usize, text: String },
    #[error(transparent)]
    Bundle(#[from] PackageError),
}

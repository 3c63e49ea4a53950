//! Run bundle generation.
//!
//! [`plan_package`] checks a [`PackageConfig`] against an example and
//! produces a [`RunPlan`]; [`render_scripts`] turns the plan into POSIX `sh`
//! scripts; [`assemble_bundle`] writes a bundle directory and
//! [`archive_bundle`] packs it into a reproducible `.tar.gz`.

mod archive;
pub(crate) mod bundle;
mod config;
mod plan;
pub(crate) mod render;

use std::fmt;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use archive::{archive_bundle, extract_archive};
pub use bundle::{assemble_bundle, RunBundle, CONFIG_FILE, JOB_FILE, RUN_SCRIPT};
pub use config::{ContainerRuntime, ExecutionMode, PackageConfig, PullPolicy, SlurmSettings};
pub use plan::{
    plan_package, DataBinding, ImageAcquisition, LauncherWrapping, PresenceCheck, RunPlan, CONTAINER_DATA_DIR, SIF_FILE,
};
pub use render::{render_scripts, shell_quote};

/// Capability a configuration asked for that the example does not declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequiredCapability {
    Mpi,
    Slurm,
    Dataset,
}

impl fmt::Display for RequiredCapability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mpi => "mpi",
            Self::Slurm => "slurm",
            Self::Dataset => "dataset",
        })
    }
}

#[derive(Debug, Error)]
pub enum PackageError {
    #[error("capability mismatch: example does not support {0}")]
    CapabilityMismatch(RequiredCapability),
    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("invalid example record: {0}")]
    InvalidRecord(String),
    #[error("output directory is not empty: {}", .0.display())]
    OutDirNotEmpty(PathBuf),
    #[error("i/o failure at {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl PackageError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidConfig { field, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

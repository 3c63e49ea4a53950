//! Curated catalog of containerized HPC visualization examples.
//!
//! - [`catalog`] scans a folder-per-example repository into an immutable
//!   [`Catalog`](catalog::Catalog) and validates entries.
//! - [`search`] filters, ranks and suggests over a catalog.
//! - [`packager`] turns an example plus user choices into a run bundle with a
//!   single entry script for Docker or Apptainer, locally, with MPI or Slurm.
//! - [`runner`] probes container runtimes and executes or dry-runs bundles.

pub mod catalog;
pub mod json;
pub mod packager;
pub mod runner;
pub mod search;
pub mod text;

/// Version string stamped into generated bundles.
pub const TOOL_VERSION: &str = concat!("vizcat ", env!("CARGO_PKG_VERSION"));

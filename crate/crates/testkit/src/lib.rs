//! Test support shared by the vizcat crates: paths to the seed corpus and
//! fixtures, a synthetic catalog generator, a brute-force search oracle and
//! stub container/MPI/Slurm executables.

pub mod files;
pub mod golden;
pub mod oracle;
pub mod stubs;
pub mod synth;

use std::path::{Path, PathBuf};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn corpus_dir() -> PathBuf {
    workspace_root().join("corpus")
}

/// The example used for the packaging goldens.
pub fn fixture_example_dir() -> PathBuf {
    workspace_root().join("crates/core/tests/fixtures/examples/golden-fixture")
}

pub fn golden_bundles_dir() -> PathBuf {
    workspace_root().join("crates/core/tests/fixtures/bundles")
}

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use vizcat_core::catalog::{scan_repository, Catalog, ExampleRecord};

pub const GLYPHS_SLUG: &str = "vector-glyphs-fluid-flow";

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn copy_dir(from: &Path, to: &Path) {
    for entry in walkdir::WalkDir::new(from) {
        let entry = entry.unwrap();
        let target = to.join(entry.path().strip_prefix(from).unwrap());
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target).unwrap();
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

/// A writable copy of the seed corpus.
pub fn corpus_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&corpus_dir(), dir.path());
    dir
}

pub fn seed_catalog() -> Catalog {
    let (catalog, report) = scan_repository(&corpus_dir()).unwrap();
    assert!(!report.has_errors(), "{report:#?}");
    catalog
}

pub fn glyphs_record() -> ExampleRecord {
    seed_catalog().get(GLYPHS_SLUG).unwrap().clone()
}

/// Every file under `root` as (relative path, bytes), sorted.
pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = walkdir::WalkDir::new(root)
        .into_iter()
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| (e.path().strip_prefix(root).unwrap().to_path_buf(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

pub fn edit_meta(folder: &Path, edit: impl FnOnce(&mut serde_json::Value)) {
    let path = folder.join("meta.json");
    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    edit(&mut value);
    fs::write(path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
}

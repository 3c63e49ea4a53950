use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::{plan_package, render_scripts, PackageConfig, PackageError, SIF_FILE};
use crate::catalog::ExampleRecord;

pub const RUN_SCRIPT: &str = "run.sh";
pub const JOB_FILE: &str = "job.sbatch";
pub const CONFIG_FILE: &str = "config.json";
pub const BUNDLE_RESOURCES_DIR: &str = "resources";
pub const BUNDLE_RECIPE_DIR: &str = "container";
/// Runner output; not part of the bundle contents.
pub const LOGS_DIR: &str = "logs";

const EXEC_MODE: u32 = 0o755;
const FILE_MODE: u32 = 0o644;

/// A materialized bundle directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunBundle {
    pub dir: PathBuf,
    /// Bundle-relative file paths, sorted.
    pub files: Vec<PathBuf>,
}

impl RunBundle {
    /// Opens an existing bundle directory. Runner logs and a pulled
    /// Apptainer image are not part of the manifest.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, PackageError> {
        let dir = dir.into();
        if !dir.join(RUN_SCRIPT).is_file() {
            return Err(PackageError::Io {
                path: dir.join(RUN_SCRIPT),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a run bundle"),
            });
        }
        let files = manifest(&dir)?;
        Ok(Self { dir, files })
    }

    pub fn config(&self) -> Result<PackageConfig, PackageError> {
        let path = self.dir.join(CONFIG_FILE);
        let raw = fs::read_to_string(&path).map_err(PackageError::io(&path))?;
        serde_json::from_str(&raw)
            .map_err(|e| PackageError::Io { path, source: std::io::Error::new(std::io::ErrorKind::InvalidData, e) })
    }

    pub fn run_script(&self) -> PathBuf {
        self.dir.join(RUN_SCRIPT)
    }
}

pub(super) fn is_bundle_content(rel: &Path) -> bool {
    let first = rel.components().next().map(|c| c.as_os_str());
    first != Some(LOGS_DIR.as_ref()) && rel != Path::new(SIF_FILE)
}

fn manifest(dir: &Path) -> Result<Vec<PathBuf>, PackageError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| PackageError::Io { path: dir.to_path_buf(), source: e.into() })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(dir).expect("walk stays under dir").to_path_buf();
        if is_bundle_content(&rel) {
            files.push(rel);
        }
    }
    files.sort();
    Ok(files)
}

/// Writes a bundle for `record` (whose folder is `example_dir`) into
/// `out_dir`, which must be absent or empty.
///
/// The output depends only on the record, the example's resource and recipe
/// files, the config, and [`crate::TOOL_VERSION`]. File modes are normalized
/// to 0755/0644.
pub fn assemble_bundle(
    record: &ExampleRecord,
    example_dir: &Path,
    config: &PackageConfig,
    out_dir: &Path,
) -> Result<RunBundle, PackageError> {
    let plan = plan_package(record, config)?;

    if out_dir.exists() {
        let mut entries = fs::read_dir(out_dir).map_err(PackageError::io(out_dir))?;
        if entries.next().is_some() {
            return Err(PackageError::OutDirNotEmpty(out_dir.to_path_buf()));
        }
    }
    fs::create_dir_all(out_dir).map_err(PackageError::io(out_dir))?;

    for (name, text) in render_scripts(&plan) {
        let mode = if name == RUN_SCRIPT { EXEC_MODE } else { FILE_MODE };
        write_file(&out_dir.join(&name), text.as_bytes(), mode)?;
    }
    let mut config_json = serde_json::to_string_pretty(config).expect("config serializes");
    config_json.push('\n');
    write_file(&out_dir.join(CONFIG_FILE), config_json.as_bytes(), FILE_MODE)?;

    if let Some(resources) = &record.resources_dir {
        copy_tree(&example_dir.join(resources), &out_dir.join(BUNDLE_RESOURCES_DIR))?;
    }
    if let Some(recipe) = &record.container.recipe_path {
        copy_tree(&example_dir.join(recipe), &out_dir.join(BUNDLE_RECIPE_DIR))?;
    }

    RunBundle::open(out_dir)
}

fn write_file(path: &Path, contents: &[u8], mode: u32) -> Result<(), PackageError> {
    fs::write(path, contents).map_err(PackageError::io(path))?;
    fs::set_permissions(path, fs::Permissions::from_mode(mode)).map_err(PackageError::io(path))
}

/// Copies regular files and directories verbatim. Symlinks are skipped.
fn copy_tree(from: &Path, to: &Path) -> Result<(), PackageError> {
    for entry in WalkDir::new(from).sort_by_file_name() {
        let entry = entry.map_err(|e| PackageError::Io { path: from.to_path_buf(), source: e.into() })?;
        let rel = entry.path().strip_prefix(from).expect("walk stays under root");
        let target = to.join(rel);
        let file_type = entry.file_type();
        if file_type.is_dir() {
            fs::create_dir_all(&target).map_err(PackageError::io(&target))?;
        } else if file_type.is_file() {
            let contents = fs::read(entry.path()).map_err(PackageError::io(entry.path()))?;
            let meta = entry
                .metadata()
                .map_err(|e| PackageError::Io { path: entry.path().to_path_buf(), source: e.into() })?;
            let mode = if meta.permissions().mode() & 0o111 != 0 { EXEC_MODE } else { FILE_MODE };
            write_file(&target, &contents, mode)?;
        }
    }
    Ok(())
}

//! Example schema, repository scanning and validation.
//!
//! A catalog root is a directory whose immediate subdirectories are example
//! folders. Each folder carries a `meta.json`, five markdown sections, and
//! optional `images/`, `resources/`, `container/` and `preview/` subfolders.

mod meta;
mod parse;
mod rules;
mod scan;
mod write;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::SystemTime;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::fold;

pub use parse::{inspect_example, parse_example};
pub use rules::{is_valid_image_ref, is_valid_slug, parse_date};
pub use scan::{scan_repository, validate_tree};
pub use write::serialize_example;

/// File holding the machine-readable metadata of an example.
pub const META_FILE: &str = "meta.json";
/// Default location of carousel images inside an example folder.
pub const IMAGES_DIR: &str = "images";
/// Default location of the opaque resource payload.
pub const RESOURCES_DIR: &str = "resources";
/// Interactive preview assets; only their presence is checked.
pub const PREVIEW_DIR: &str = "preview";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog root not found: {}", .0.display())]
    RootNotFound(PathBuf),
    #[error("catalog root not readable: {}: {source}", path.display())]
    RootNotReadable { path: PathBuf, source: io::Error },
    #[error("folder not writable: {}: {source}", path.display())]
    FolderNotWritable { path: PathBuf, source: io::Error },
    #[error("invalid record ({code}): {message}")]
    InvalidRecord { code: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TagCategory {
    DataType,
    Technique,
    Domain,
}

impl TagCategory {
    pub const ALL: [TagCategory; 3] = [Self::DataType, Self::Technique, Self::Domain];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DataType => "DataType",
            Self::Technique => "Technique",
            Self::Domain => "Domain",
        }
    }
}

impl fmt::Display for TagCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TagCategory {
    type Err = String;

    /// Accepts the canonical names case-insensitively, plus `data-type` and
    /// `data_type` spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let squashed: String = fold(s).chars().filter(|c| !matches!(c, '-' | '_' | ' ')).collect();
        match squashed.as_str() {
            "datatype" => Ok(Self::DataType),
            "technique" => Ok(Self::Technique),
            "domain" => Ok(Self::Domain),
            _ => Err(format!("unknown tag category `{s}`")),
        }
    }
}

/// Categorized label. The display form of `name` is preserved; comparisons
/// across the catalog go through [`Tag::key`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tag {
    pub name: String,
    pub category: TagCategory,
}

impl Tag {
    pub fn new(name: impl Into<String>, category: TagCategory) -> Self {
        Self { name: name.into(), category }
    }

    /// Case-folded name used for matching.
    pub fn key(&self) -> String {
        fold(&self.name)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Capabilities {
    pub preview: bool,
    pub mpi: bool,
    pub slurm: bool,
    pub dataset_replaceable: bool,
}

impl Capabilities {
    pub fn has(&self, cap: Capability) -> bool {
        match cap {
            Capability::Preview => self.preview,
            Capability::Mpi => self.mpi,
            Capability::Slurm => self.slurm,
            Capability::DatasetReplaceable => self.dataset_replaceable,
        }
    }
}

/// A single capability flag, used by queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Preview,
    Mpi,
    Slurm,
    DatasetReplaceable,
}

impl Capability {
    pub const ALL: [Capability; 4] = [Self::Preview, Self::Mpi, Self::Slurm, Self::DatasetReplaceable];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Preview => "preview",
            Self::Mpi => "mpi",
            Self::Slurm => "slurm",
            Self::DatasetReplaceable => "dataset_replaceable",
        }
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Capability {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|c| c.as_str() == s.trim()).ok_or_else(|| format!("unknown capability `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainerRef {
    pub image: String,
    pub entrypoint: Vec<String>,
    pub recipe_path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionId {
    Description,
    Instructions,
    Limitations,
    References,
    Resources,
}

impl SectionId {
    pub const ALL: [SectionId; 5] =
        [Self::Description, Self::Instructions, Self::Limitations, Self::References, Self::Resources];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Description => "description",
            Self::Instructions => "instructions",
            Self::Limitations => "limitations",
            Self::References => "references",
            Self::Resources => "resources",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.md", self.as_str())
    }

    /// Sections that must carry non-blank text.
    pub fn is_required(self) -> bool {
        matches!(self, Self::Description | Self::Instructions)
    }
}

/// One catalog entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub slug: String,
    pub title: String,
    pub authors: Vec<String>,
    pub added: NaiveDate,
    pub tags: Vec<Tag>,
    pub capabilities: Capabilities,
    /// Allows Slurm submission without MPI.
    pub single_task: bool,
    pub container: ContainerRef,
    pub sections: BTreeMap<SectionId, String>,
    pub images: Vec<String>,
    pub issue_url: Option<String>,
    pub resources_dir: Option<String>,
}

impl ExampleRecord {
    pub fn section(&self, id: SectionId) -> &str {
        self.sections.get(&id).map(String::as_str).unwrap_or("")
    }

    pub fn first_image(&self) -> Option<&str> {
        self.images.first().map(String::as_str)
    }

    /// True when a tag folds to `key` (which must already be folded).
    pub fn has_tag_key(&self, key: &str) -> bool {
        self.tags.iter().any(|t| t.key() == key)
    }

    pub fn tags_in(&self, category: TagCategory) -> impl Iterator<Item = &Tag> {
        self.tags.iter().filter(move |t| t.category == category)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Error => "error",
            Self::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub folder: PathBuf,
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl fmt::Display for ReportEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: [{}] {}", self.severity, self.folder.display(), self.code, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<ReportEntry>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn error(&mut self, folder: &Path, code: impl Into<String>, message: impl Into<String>) {
        self.push(folder, Severity::Error, code, message);
    }

    pub fn warning(&mut self, folder: &Path, code: impl Into<String>, message: impl Into<String>) {
        self.push(folder, Severity::Warning, code, message);
    }

    fn push(&mut self, folder: &Path, severity: Severity, code: impl Into<String>, message: impl Into<String>) {
        self.entries.push(ReportEntry {
            folder: folder.to_path_buf(),
            severity,
            code: code.into(),
            message: message.into(),
        });
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.entries.extend(other.entries);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn error_count(&self) -> usize {
        self.entries.iter().filter(|e| e.severity == Severity::Error).count()
    }

    pub fn warning_count(&self) -> usize {
        self.entries.iter().filter(|e| e.severity == Severity::Warning).count()
    }

    pub fn has_errors(&self) -> bool {
        self.error_count() > 0
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.entries.iter().any(|e| e.code == code)
    }

    /// Stable order: by folder, then errors before warnings, then code.
    pub(crate) fn sort(&mut self) {
        self.entries.sort_by(|a, b| (&a.folder, a.severity, &a.code).cmp(&(&b.folder, b.severity, &b.code)));
    }
}

/// Immutable snapshot of a scanned repository.
#[derive(Debug, Clone)]
pub struct Catalog {
    examples: BTreeMap<String, ExampleRecord>,
    tag_vocabulary: BTreeSet<Tag>,
    scanned_at: SystemTime,
    root: PathBuf,
}

// Scan time is not part of catalog identity.
impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.examples == other.examples && self.tag_vocabulary == other.tag_vocabulary && self.root == other.root
    }
}

impl Eq for Catalog {}

impl Catalog {
    /// Builds a catalog from already-validated records. The vocabulary is the
    /// union of their tags; callers are responsible for tag consistency.
    pub fn from_records(root: impl Into<PathBuf>, records: impl IntoIterator<Item = ExampleRecord>) -> Self {
        let examples: BTreeMap<String, ExampleRecord> = records.into_iter().map(|r| (r.slug.clone(), r)).collect();
        let tag_vocabulary = examples.values().flat_map(|r| r.tags.iter().cloned()).collect();
        Self { examples, tag_vocabulary, scanned_at: SystemTime::now(), root: root.into() }
    }

    pub fn empty(root: impl Into<PathBuf>) -> Self {
        Self::from_records(root, std::iter::empty())
    }

    pub fn get(&self, slug: &str) -> Option<&ExampleRecord> {
        self.examples.get(slug)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Records in slug order.
    pub fn iter(&self) -> impl Iterator<Item = &ExampleRecord> {
        self.examples.values()
    }

    pub fn examples(&self) -> &BTreeMap<String, ExampleRecord> {
        &self.examples
    }

    pub fn tag_vocabulary(&self) -> &BTreeSet<Tag> {
        &self.tag_vocabulary
    }

    pub fn scanned_at(&self) -> SystemTime {
        self.scanned_at
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// On-disk folder of an example.
    pub fn example_dir(&self, slug: &str) -> PathBuf {
        self.root.join(slug)
    }
}

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::meta::{unknown_keys, MetaFile};
use super::rules::{check_record, is_contained_relative, parse_date};
use super::{
    Capabilities, ContainerRef, ExampleRecord, SectionId, Tag, TagCategory, ValidationReport, IMAGES_DIR, META_FILE,
    PREVIEW_DIR, RESOURCES_DIR,
};

/// Parses one example folder. Warnings are dropped on success; use
/// [`inspect_example`] to keep them.
pub fn parse_example(folder: &Path) -> Result<ExampleRecord, ValidationReport> {
    match inspect_example(folder) {
        (Some(record), _) => Ok(record),
        (None, report) => Err(report),
    }
}

/// Parses one example folder and returns the record (if it has no errors)
/// together with every finding.
pub fn inspect_example(folder: &Path) -> (Option<ExampleRecord>, ValidationReport) {
    let mut report = ValidationReport::new();
    let record = parse_into(folder, &mut report);
    report.sort();
    match record {
        Some(record) if !report.has_errors() => (Some(record), report),
        _ => (None, report),
    }
}

fn parse_into(folder: &Path, report: &mut ValidationReport) -> Option<ExampleRecord> {
    let slug = match folder.file_name().and_then(|n| n.to_str()) {
        Some(s) => s.to_owned(),
        None => {
            report.error(folder, "bad-slug", "folder name is not valid UTF-8");
            return None;
        }
    };

    let meta_path = folder.join(META_FILE);
    let raw = match fs::read_to_string(&meta_path) {
        Ok(raw) => raw,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            report.error(folder, "missing-metadata", format!("{META_FILE} not found"));
            return None;
        }
        Err(e) => {
            report.error(folder, "malformed-metadata", format!("cannot read {META_FILE}: {e}"));
            return None;
        }
    };
    let value: serde_json::Value = match serde_json::from_str(&raw) {
        Ok(v) => v,
        Err(e) => {
            report.error(folder, "malformed-metadata", format!("{META_FILE}: {e}"));
            return None;
        }
    };
    for key in unknown_keys(&value) {
        report.warning(folder, "unknown-key", format!("unknown metadata key `{key}`"));
    }
    let meta: MetaFile = match serde_json::from_value(value) {
        Ok(m) => m,
        Err(e) => {
            report.error(folder, "malformed-metadata", format!("{META_FILE}: {e}"));
            return None;
        }
    };

    let added = parse_date(&meta.added);
    if added.is_none() {
        report.error(folder, "bad-date", format!("`{}` is not a YYYY-MM-DD calendar date", meta.added));
    }

    let mut tags = Vec::with_capacity(meta.tags.len());
    for raw_tag in &meta.tags {
        match raw_tag.category.parse::<TagCategory>() {
            Ok(category) if raw_tag.category == category.as_str() => tags.push(Tag::new(&raw_tag.name, category)),
            _ => report.error(
                folder,
                "unknown-tag-category",
                format!(
                    "tag `{}` has category `{}`; expected DataType, Technique or Domain",
                    raw_tag.name, raw_tag.category
                ),
            ),
        }
    }

    let images = match &meta.images {
        Some(list) => list.clone(),
        None => default_images(folder),
    };
    let resources_dir = match &meta.resources {
        Some(dir) => Some(dir.clone()),
        None => folder.join(RESOURCES_DIR).is_dir().then(|| RESOURCES_DIR.to_owned()),
    };

    let mut sections = BTreeMap::new();
    for id in SectionId::ALL {
        let path = folder.join(id.file_name());
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
            Err(e) => {
                report.error(folder, "malformed-section", format!("cannot read {}: {e}", id.file_name()));
                String::new()
            }
        };
        sections.insert(id, text);
    }

    let record = ExampleRecord {
        slug,
        title: meta.title,
        authors: meta.authors,
        added: added.unwrap_or_default(),
        tags,
        capabilities: Capabilities {
            preview: meta.capabilities.preview,
            mpi: meta.capabilities.mpi,
            slurm: meta.capabilities.slurm,
            dataset_replaceable: meta.capabilities.dataset_replaceable,
        },
        single_task: meta.single_task,
        container: ContainerRef {
            image: meta.container.image,
            entrypoint: meta.container.entrypoint,
            recipe_path: meta.container.recipe,
        },
        sections,
        images,
        issue_url: meta.issue_url,
        resources_dir,
    };

    // Tag problems found above already cover an empty/unknown category list.
    let tags_already_reported = report.has_code("unknown-tag-category");
    for (code, message) in check_record(&record) {
        if tags_already_reported && matches!(code.as_str(), "missing-tags" | "missing-datatype-tag") {
            continue;
        }
        report.error(folder, code, message);
    }

    check_on_disk(folder, &record, report);
    Some(record)
}

/// Files under `images/`, in lexicographic file-name order.
pub(super) fn default_images(folder: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(folder.join(IMAGES_DIR))
        .into_iter()
        .flatten()
        .filter_map(Result::ok)
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| !n.starts_with('.'))
        .collect();
    names.sort();
    names.into_iter().map(|n| format!("{IMAGES_DIR}/{n}")).collect()
}

/// Canonical target of `rel` if it exists and stays inside `folder`.
/// `Err(true)` means it resolves outside the folder, `Err(false)` that it
/// does not exist.
fn resolve_inside(folder: &Path, rel: &str) -> Result<PathBuf, bool> {
    let base = folder.canonicalize().map_err(|_| false)?;
    let target = folder.join(rel).canonicalize().map_err(|_| false)?;
    if target.starts_with(&base) {
        Ok(target)
    } else {
        Err(true)
    }
}

fn check_on_disk(folder: &Path, record: &ExampleRecord, report: &mut ValidationReport) {
    for image in record.images.iter().filter(|p| is_contained_relative(p)) {
        match resolve_inside(folder, image) {
            Ok(path) if path.is_file() => {}
            Err(true) => report.error(folder, "path-escape", format!("image `{image}` resolves outside the folder")),
            _ => report.error(folder, "bad-image-ref", format!("image `{image}` is not a file in the folder")),
        }
    }

    let dirs = [("recipe", &record.container.recipe_path), ("resources", &record.resources_dir)];
    for (what, dir) in dirs {
        let Some(dir) = dir.as_deref().filter(|d| is_contained_relative(d)) else {
            continue;
        };
        match resolve_inside(folder, dir) {
            Ok(path) if path.is_dir() => {}
            Err(true) => report.error(folder, "path-escape", format!("{what} `{dir}` resolves outside the folder")),
            _ => report.error(folder, "missing-path", format!("{what} directory `{dir}` does not exist")),
        }
    }

    if record.capabilities.preview && !has_preview_assets(folder) {
        report.warning(
            folder,
            "preview-assets-missing",
            format!("preview is declared but {PREVIEW_DIR}/ has no files"),
        );
    }
}

fn has_preview_assets(folder: &Path) -> bool {
    walkdir::WalkDir::new(folder.join(PREVIEW_DIR)).into_iter().filter_map(Result::ok).any(|e| e.file_type().is_file())
}

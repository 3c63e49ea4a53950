use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::parse::inspect_example;
use super::rules::is_valid_slug;
use super::{Catalog, CatalogError, ExampleRecord, Tag, ValidationReport};
use crate::text::fold;

/// Scans every immediate, non-hidden subdirectory of `root`. Valid examples
/// enter the catalog; anything with an Error stays out and is only reported.
pub fn scan_repository(root: &Path) -> Result<(Catalog, ValidationReport), CatalogError> {
    let folders = candidate_folders(root)?;
    let mut report = ValidationReport::new();

    let duplicates = duplicate_slugs(&folders);
    let mut parsed: Vec<ExampleRecord> = Vec::new();
    for folder in &folders {
        let (record, mut found) = inspect_example(folder);
        if duplicates.contains(folder) {
            found.error(folder, "duplicate-slug", "another folder has the same slug up to case");
        }
        if let Some(record) = record.filter(|_| !found.has_errors()) {
            parsed.push(record);
        }
        report.extend(found);
    }

    // Candidates are sorted, so the first folder to use a tag defines its
    // display form and category for the whole catalog.
    let mut vocabulary: BTreeMap<String, Tag> = BTreeMap::new();
    let mut accepted = Vec::with_capacity(parsed.len());
    for record in parsed {
        let conflicts: Vec<String> = record
            .tags
            .iter()
            .filter_map(|tag| match vocabulary.get(&tag.key()) {
                Some(existing) if existing != tag => Some(format!(
                    "tag `{}` ({}) conflicts with `{}` ({}) used by an earlier example",
                    tag.name, tag.category, existing.name, existing.category
                )),
                _ => None,
            })
            .collect();
        if conflicts.is_empty() {
            for tag in &record.tags {
                vocabulary.entry(tag.key()).or_insert_with(|| tag.clone());
            }
            accepted.push(record);
        } else {
            let folder = root.join(&record.slug);
            for message in conflicts {
                report.error(&folder, "tag-conflict", message);
            }
        }
    }

    report.sort();
    Ok((Catalog::from_records(root, accepted), report))
}

/// Aggregated findings for every candidate folder under `root`.
pub fn validate_tree(root: &Path) -> Result<ValidationReport, CatalogError> {
    scan_repository(root).map(|(_, report)| report)
}

fn candidate_folders(root: &Path) -> Result<Vec<PathBuf>, CatalogError> {
    if !root.is_dir() {
        return Err(CatalogError::RootNotFound(root.to_path_buf()));
    }
    let entries =
        fs::read_dir(root).map_err(|source| CatalogError::RootNotReadable { path: root.to_path_buf(), source })?;
    let mut folders = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CatalogError::RootNotReadable { path: root.to_path_buf(), source })?;
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if !hidden && entry.path().is_dir() {
            folders.push(entry.path());
        }
    }
    folders.sort();
    Ok(folders)
}

/// Folders whose names collide after case folding. In each colliding group
/// the first folder with a well-formed slug keeps the name.
fn duplicate_slugs(folders: &[PathBuf]) -> Vec<PathBuf> {
    let mut groups: BTreeMap<String, Vec<&PathBuf>> = BTreeMap::new();
    for folder in folders {
        let name = folder.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
        groups.entry(fold(&name)).or_default().push(folder);
    }
    let mut dups = Vec::new();
    for group in groups.into_values().filter(|g| g.len() > 1) {
        let keeper =
            group.iter().position(|f| f.file_name().and_then(|n| n.to_str()).is_some_and(is_valid_slug)).unwrap_or(0);
        dups.extend(group.into_iter().enumerate().filter(|(i, _)| *i != keeper).map(|(_, f)| f.clone()));
    }
    dups
}

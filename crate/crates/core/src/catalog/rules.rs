//! Record invariants shared by parsing and serialization.

use std::collections::BTreeSet;
use std::path::{Component, Path};
use std::sync::LazyLock;

use regex::Regex;

use super::{ExampleRecord, SectionId, TagCategory};

pub const MAX_SLUG_LEN: usize = 64;

static SLUG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[a-z0-9][a-z0-9-]*$").unwrap());

// [host[:port]/]name[:tag|@digest]
static IMAGE_REF: LazyLock<Regex> = LazyLock::new(|| {
    let label = r"[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?";
    let host = format!(r"{label}(?:\.{label})*(?::[0-9]+)?");
    let component = r"[a-z0-9]+(?:(?:[._]|__|-+)[a-z0-9]+)*";
    let tag = r"[A-Za-z0-9_][A-Za-z0-9_.-]{0,127}";
    let digest = r"[A-Za-z][A-Za-z0-9]*(?:[-_+.][A-Za-z][A-Za-z0-9]*)*:[0-9a-fA-F]{32,}";
    Regex::new(&format!(r"^(?:{host}/)?{component}(?:/{component})*(?::{tag}|@{digest})?$")).unwrap()
});

static DATE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[0-9]{4}-[0-9]{2}-[0-9]{2}$").unwrap());

pub fn is_valid_slug(slug: &str) -> bool {
    slug.len() <= MAX_SLUG_LEN && SLUG.is_match(slug)
}

pub fn is_valid_image_ref(image: &str) -> bool {
    IMAGE_REF.is_match(image)
}

pub fn parse_date(s: &str) -> Option<chrono::NaiveDate> {
    if !DATE.is_match(s) {
        return None;
    }
    chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

/// A relative path that stays inside its base: non-empty, not absolute, no
/// `..` components.
pub fn is_contained_relative(path: &str) -> bool {
    if path.is_empty() || path.contains('\0') || path.contains('\\') {
        return false;
    }
    Path::new(path).components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
        && Path::new(path).components().any(|c| matches!(c, Component::Normal(_)))
}

pub fn is_valid_issue_url(s: &str) -> bool {
    url::Url::parse(s).map(|u| matches!(u.scheme(), "http" | "https") && u.host().is_some()).unwrap_or(false)
}

/// Checks the invariants that do not need the filesystem. Returns
/// `(code, message)` pairs for every violation.
pub fn check_record(record: &ExampleRecord) -> Vec<(String, String)> {
    let mut problems = Vec::new();
    let mut fail = |code: &str, message: String| problems.push((code.to_owned(), message));

    if !is_valid_slug(&record.slug) {
        fail("bad-slug", format!("`{}` does not match [a-z0-9][a-z0-9-]* (max {MAX_SLUG_LEN})", record.slug));
    }
    if record.title.trim().is_empty() {
        fail("missing-title", "title is empty".into());
    }
    if record.authors.is_empty() || record.authors.iter().any(|a| a.trim().is_empty()) {
        fail("missing-authors", "authors must be a non-empty list of non-empty names".into());
    }

    if record.tags.is_empty() {
        fail("missing-tags", "at least one tag is required".into());
    }
    let mut seen = BTreeSet::new();
    for tag in &record.tags {
        if tag.name.trim().is_empty() || tag.name.trim() != tag.name {
            fail("bad-tag", format!("tag name `{}` is empty or padded with whitespace", tag.name));
        } else if !seen.insert(tag.key()) {
            fail("duplicate-tag", format!("tag `{}` appears more than once", tag.name));
        }
    }
    if !record.tags.is_empty() && !record.tags.iter().any(|t| t.category == TagCategory::DataType) {
        fail("missing-datatype-tag", "at least one DataType tag is required".into());
    }

    let caps = record.capabilities;
    if caps.slurm && !caps.mpi && !record.single_task {
        fail("slurm-requires-mpi", "slurm requires mpi unless single_task is set".into());
    }

    if !is_valid_image_ref(&record.container.image) {
        fail("bad-container-image", format!("`{}` is not a valid image reference", record.container.image));
    }
    match record.container.entrypoint.first() {
        Some(first) if !first.trim().is_empty() => {}
        _ => fail("bad-entrypoint", "entrypoint must start with a non-empty token".into()),
    }
    if record.container.entrypoint.iter().any(|a| a.contains('\0')) {
        fail("bad-entrypoint", "entrypoint arguments must not contain NUL".into());
    }

    let paths = record.images.iter().chain(&record.container.recipe_path).chain(&record.resources_dir);
    for path in paths {
        if !is_contained_relative(path) {
            fail("path-escape", format!("`{path}` leaves the example folder"));
        }
    }

    if let Some(url) = &record.issue_url {
        if !is_valid_issue_url(url) {
            fail("bad-issue-url", format!("`{url}` is not an http(s) URL"));
        }
    }

    for id in SectionId::ALL {
        if id.is_required() && record.section(id).trim().is_empty() {
            fail(&format!("missing-section:{}", id.as_str()), format!("{} is empty", id.file_name()));
        }
    }

    problems
}

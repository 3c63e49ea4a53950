//! On-disk `meta.json` representation.

use serde::{Deserialize, Serialize};

pub const TOP_LEVEL_KEYS: &[&str] = &[
    "title",
    "authors",
    "added",
    "tags",
    "capabilities",
    "container",
    "single_task",
    "issue_url",
    "images",
    "resources",
];
pub const TAG_KEYS: &[&str] = &["name", "category"];
pub const CAPABILITY_KEYS: &[&str] = &["preview", "mpi", "slurm", "dataset_replaceable"];
pub const CONTAINER_KEYS: &[&str] = &["image", "entrypoint", "recipe"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaFile {
    pub title: String,
    pub authors: Vec<String>,
    pub added: String,
    pub tags: Vec<MetaTag>,
    #[serde(default)]
    pub capabilities: MetaCapabilities,
    pub container: MetaContainer,
    #[serde(default)]
    pub single_task: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issue_url: Option<String>,
    /// Explicit carousel list; when absent the files under `images/` are used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<String>>,
    /// Explicit resource folder; when absent `resources/` is used if present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaTag {
    pub name: String,
    pub category: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MetaCapabilities {
    #[serde(default)]
    pub preview: bool,
    #[serde(default)]
    pub mpi: bool,
    #[serde(default)]
    pub slurm: bool,
    #[serde(default)]
    pub dataset_replaceable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaContainer {
    pub image: String,
    pub entrypoint: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
}

/// Dotted paths of keys not in the schema.
pub fn unknown_keys(value: &serde_json::Value) -> Vec<String> {
    let mut found = Vec::new();
    let Some(top) = value.as_object() else {
        return found;
    };
    for (key, child) in top {
        if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
            found.push(key.clone());
            continue;
        }
        match key.as_str() {
            "capabilities" => collect(child, CAPABILITY_KEYS, "capabilities", &mut found),
            "container" => collect(child, CONTAINER_KEYS, "container", &mut found),
            "tags" => {
                for (i, tag) in child.as_array().into_iter().flatten().enumerate() {
                    collect(tag, TAG_KEYS, &format!("tags[{i}]"), &mut found);
                }
            }
            _ => {}
        }
    }
    found
}

fn collect(value: &serde_json::Value, allowed: &[&str], prefix: &str, found: &mut Vec<String>) {
    if let Some(obj) = value.as_object() {
        found.extend(obj.keys().filter(|k| !allowed.contains(&k.as_str())).map(|k| format!("{prefix}.{k}")));
    }
}

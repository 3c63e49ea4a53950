use std::fs;
use std::path::Path;

use super::meta::{MetaCapabilities, MetaContainer, MetaFile, MetaTag};
use super::parse::default_images;
use super::rules::check_record;
use super::{CatalogError, ExampleRecord, SectionId, META_FILE, RESOURCES_DIR};

/// Writes `record` into `folder` so that parsing the folder yields an equal
/// record.
///
/// The folder must be named after the slug. Images, resource and recipe
/// directories are referenced, not created: they must already exist in the
/// folder. The record is fully checked before anything is written.
pub fn serialize_example(record: &ExampleRecord, folder: &Path) -> Result<(), CatalogError> {
    let invalid = |code: &str, message: String| CatalogError::InvalidRecord { code: code.to_owned(), message };

    if let Some((code, message)) = check_record(record).into_iter().next() {
        return Err(invalid(&code, message));
    }
    if folder.file_name().and_then(|n| n.to_str()) != Some(record.slug.as_str()) {
        return Err(invalid("slug-mismatch", format!("folder {} is not named `{}`", folder.display(), record.slug)));
    }
    for image in &record.images {
        if !folder.join(image).is_file() {
            return Err(invalid("bad-image-ref", format!("image `{image}` does not exist in the folder")));
        }
    }
    for dir in record.container.recipe_path.iter().chain(&record.resources_dir) {
        if !folder.join(dir).is_dir() {
            return Err(invalid("missing-path", format!("directory `{dir}` does not exist in the folder")));
        }
    }
    let default_resources = folder.join(RESOURCES_DIR).is_dir();
    if record.resources_dir.is_none() && default_resources {
        return Err(invalid("resources-mismatch", format!("record has no resources but {RESOURCES_DIR}/ exists")));
    }

    // Only spell out images/resources when they differ from what the folder
    // layout implies.
    let images = (record.images != default_images(folder)).then(|| record.images.clone());
    let resources = match record.resources_dir.as_deref() {
        Some(RESOURCES_DIR) if default_resources => None,
        other => other.map(str::to_owned),
    };

    let meta = MetaFile {
        title: record.title.clone(),
        authors: record.authors.clone(),
        added: record.added.format("%Y-%m-%d").to_string(),
        tags: record
            .tags
            .iter()
            .map(|t| MetaTag { name: t.name.clone(), category: t.category.as_str().to_owned() })
            .collect(),
        capabilities: MetaCapabilities {
            preview: record.capabilities.preview,
            mpi: record.capabilities.mpi,
            slurm: record.capabilities.slurm,
            dataset_replaceable: record.capabilities.dataset_replaceable,
        },
        container: MetaContainer {
            image: record.container.image.clone(),
            entrypoint: record.container.entrypoint.clone(),
            recipe: record.container.recipe_path.clone(),
        },
        single_task: record.single_task,
        issue_url: record.issue_url.clone(),
        images,
        resources,
    };
    let mut json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    json.push('\n');

    let write = |name: &str, contents: &str| {
        fs::write(folder.join(name), contents)
            .map_err(|source| CatalogError::FolderNotWritable { path: folder.to_path_buf(), source })
    };
    fs::create_dir_all(folder)
        .map_err(|source| CatalogError::FolderNotWritable { path: folder.to_path_buf(), source })?;
    write(META_FILE, &json)?;
    for id in SectionId::ALL {
        write(&id.file_name(), record.section(id))?;
    }
    Ok(())
}

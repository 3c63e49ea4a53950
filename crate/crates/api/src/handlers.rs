use std::path::Path as FsPath;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderMap, HeaderValue};
use axum::response::{IntoResponse, Response};
use serde::{Deserialize, Serialize};
use serde_json::json;
use vizcat_core::catalog::{Catalog, ExampleRecord};
use vizcat_core::json::canonical_json;
use vizcat_core::packager::{archive_bundle, assemble_bundle, PackageConfig};
use vizcat_core::search::{facet_counts, search, suggest as suggest_keywords, SearchQuery};

use crate::error::ApiError;
use crate::params::parse_search_query;
use crate::{AppState, DEFAULT_SUGGEST_LIMIT, MAX_SUGGEST_LIMIT};

type ApiResult = Result<Response, ApiError>;

fn json_body<T: Serialize + ?Sized>(value: &T) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], canonical_json(value)).into_response()
}

pub async fn health(State(state): State<Arc<AppState>>) -> Response {
    json_body(&json!({"status": "ok", "examples": state.catalog().len()}))
}

pub async fn list_examples(State(state): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> ApiResult {
    let query = parse_search_query(raw.as_deref())?;
    Ok(json_body(&search(&state.catalog(), &query)?))
}

/// Rejects path parameters that could name anything but a single entry.
fn guard_segment(value: &str) -> Result<(), ApiError> {
    if value.is_empty() || value == "." || value == ".." || value.contains(['/', '\\', '\0']) {
        return Err(ApiError::forbidden("path traversal is not allowed"));
    }
    Ok(())
}

fn lookup<'a>(catalog: &'a Catalog, slug: &str) -> Result<&'a ExampleRecord, ApiError> {
    guard_segment(slug)?;
    catalog.get(slug).ok_or_else(|| ApiError::not_found(format!("no example `{slug}`")))
}

pub async fn get_example(State(state): State<Arc<AppState>>, Path(slug): Path<String>) -> ApiResult {
    let catalog = state.catalog();
    Ok(json_body(lookup(&catalog, &slug)?))
}

/// `name` is the image path relative to `images/`, or the full relative path
/// for carousel images stored elsewhere. Only images listed by the record are
/// served.
pub async fn get_image(State(state): State<Arc<AppState>>, Path((slug, name)): Path<(String, String)>) -> ApiResult {
    for segment in name.split('/') {
        guard_segment(segment)?;
    }
    let catalog = state.catalog();
    let record = lookup(&catalog, &slug)?;
    let listed = record
        .images
        .iter()
        .find(|entry| **entry == name || entry.strip_prefix("images/") == Some(name.as_str()))
        .ok_or_else(|| ApiError::not_found(format!("example `{slug}` has no image `{name}`")))?;

    let folder = catalog.example_dir(&slug);
    let path = folder.join(listed);
    let not_found = |_| ApiError::not_found(format!("image `{name}` is missing on disk"));
    let (resolved, base) = (path.canonicalize().map_err(not_found)?, folder.canonicalize().map_err(not_found)?);
    if !resolved.starts_with(&base) {
        return Err(ApiError::forbidden("image resolves outside its example folder"));
    }
    let bytes = tokio::fs::read(&resolved).await.map_err(not_found)?;
    let mime = mime_guess::from_path(&resolved).first_or_octet_stream();
    Ok((
        [(header::CONTENT_TYPE, mime.essence_str().to_owned()), (header::X_CONTENT_TYPE_OPTIONS, "nosniff".to_owned())],
        bytes,
    )
        .into_response())
}

pub async fn tags(State(state): State<Arc<AppState>>) -> Response {
    let catalog = state.catalog();
    let counts = facet_counts(&catalog, &SearchQuery::default());
    let body: Vec<_> = catalog
        .tag_vocabulary()
        .iter()
        .map(|tag| json!({"name": tag.name, "category": tag.category, "count": counts.get(&tag.name).copied().unwrap_or(0)}))
        .collect();
    json_body(&body)
}

pub async fn suggest(State(state): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> ApiResult {
    let mut prefix = None;
    let mut limit = DEFAULT_SUGGEST_LIMIT;
    for (key, value) in url::form_urlencoded::parse(raw.as_deref().unwrap_or("").as_bytes()) {
        match key.as_ref() {
            "prefix" => prefix = Some(value.into_owned()),
            "limit" => {
                limit = value.parse().ok().filter(|l| (1..=MAX_SUGGEST_LIMIT).contains(l)).ok_or_else(|| {
                    ApiError::bad_query(format!("limit must be 1..={MAX_SUGGEST_LIMIT}, got `{value}`"))
                })?;
            }
            other => return Err(ApiError::bad_query(format!("unknown parameter `{other}`"))),
        }
    }
    let prefix = prefix.filter(|p| !p.is_empty()).ok_or_else(|| ApiError::bad_query("prefix must not be empty"))?;
    Ok(json_body(&suggest_keywords(&state.catalog(), &prefix, limit)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackageRequest {
    pub slug: String,
    pub config: PackageConfig,
}

fn build_archive(record: &ExampleRecord, example_dir: &FsPath, config: &PackageConfig) -> Result<Vec<u8>, ApiError> {
    let scratch = tempfile::tempdir().map_err(|e| ApiError::internal(format!("temporary directory: {e}")))?;
    let bundle = assemble_bundle(record, example_dir, config, &scratch.path().join("bundle"))?;
    Ok(archive_bundle(&bundle)?)
}

pub async fn package(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let request: PackageRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::invalid_config(format!("request body: {e}")))?;
    let catalog = state.catalog();
    let record = lookup(&catalog, &request.slug)?.clone();
    let example_dir = catalog.example_dir(&record.slug);
    let config = request.config;
    let bytes = tokio::task::spawn_blocking(move || build_archive(&record, &example_dir, &config))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    let disposition = format!("attachment; filename=\"{}-bundle.tar.gz\"", request.slug);
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("application/gzip")),
            (header::CONTENT_DISPOSITION, HeaderValue::from_str(&disposition).expect("slug is a header-safe token")),
        ],
        bytes,
    )
        .into_response())
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

pub async fn reload(State(state): State<Arc<AppState>>, headers: HeaderMap) -> ApiResult {
    let Some(expected) = state.config.admin_token.as_deref().filter(|t| !t.is_empty()) else {
        return Err(ApiError::forbidden("reload is disabled: no admin token configured"));
    };
    let presented =
        headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok()).and_then(|v| v.strip_prefix("Bearer "));
    if !presented.is_some_and(|t| constant_time_eq(t.as_bytes(), expected.as_bytes())) {
        return Err(ApiError::unauthorized("missing or wrong bearer token"));
    }
    let worker = Arc::clone(&state);
    let report = tokio::task::spawn_blocking(move || worker.reload())
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(json_body(&json!({
        "status": "ok",
        "examples": state.catalog().len(),
        "errors": report.error_count(),
        "warnings": report.warning_count(),
    })))
}

pub async fn unknown_endpoint() -> ApiError {
    ApiError::not_found("unknown API endpoint")
}

//! Read-only HTTP API over a catalog root, plus a token-gated reload.
//!
//! All JSON bodies are canonical (sorted keys, no insignificant whitespace)
//! so they can be compared byte-for-byte with the library output.

mod error;
mod handlers;
mod params;

use std::future::Future;
use std::io;
use std::path::PathBuf;
use std::sync::Arc;

use arc_swap::ArcSwap;
use axum::http::{header, HeaderValue, Method};
use axum::routing::{any, get, post};
use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::{ServeDir, ServeFile};
use vizcat_core::catalog::{scan_repository, Catalog, CatalogError, ValidationReport};

pub use error::ApiError;
pub use handlers::PackageRequest;
pub use params::{parse_search_query, search_query_string};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_SUGGEST_LIMIT: usize = 10;
pub const MAX_SUGGEST_LIMIT: usize = 50;

#[derive(Debug, Clone, Default)]
pub struct ApiConfig {
    pub root: PathBuf,
    /// Bearer token for `POST /api/reload`; reload is disabled without one.
    pub admin_token: Option<String>,
    /// Allowed CORS origin. `None` or `*` allows any origin.
    pub cors_origin: Option<String>,
    /// Built web UI to serve for non-API paths.
    pub static_dir: Option<PathBuf>,
}

/// Shared service state: the configuration and the current catalog snapshot.
pub struct AppState {
    config: ApiConfig,
    catalog: ArcSwap<Catalog>,
}

impl AppState {
    /// Scans the root once. Invalid examples are left out, as in any scan;
    /// only an unusable root is an error.
    pub fn load(config: ApiConfig) -> Result<(Self, ValidationReport), CatalogError> {
        let (catalog, report) = scan_repository(&config.root)?;
        let state = Self { config, catalog: ArcSwap::from_pointee(catalog) };
        Ok((state, report))
    }

    pub fn config(&self) -> &ApiConfig {
        &self.config
    }

    pub fn catalog(&self) -> Arc<Catalog> {
        self.catalog.load_full()
    }

    /// Rescans the root and swaps the snapshot. On failure the previous
    /// snapshot stays in place.
    pub fn reload(&self) -> Result<ValidationReport, CatalogError> {
        let (catalog, report) = scan_repository(&self.config.root)?;
        self.catalog.store(Arc::new(catalog));
        Ok(report)
    }
}

fn cors(origin: Option<&str>) -> CorsLayer {
    let allow = match origin {
        Some(o) if o != "*" => match HeaderValue::from_str(o) {
            Ok(value) => AllowOrigin::list([value]),
            Err(_) => AllowOrigin::list([]),
        },
        _ => AllowOrigin::any(),
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE, header::AUTHORIZATION])
        .expose_headers([header::CONTENT_DISPOSITION])
}

pub fn router(state: Arc<AppState>) -> Router {
    let static_dir = state.config.static_dir.clone();
    let cors = cors(state.config.cors_origin.as_deref());
    let api = Router::new()
        .route("/api/health", get(handlers::health))
        .route("/api/examples", get(handlers::list_examples))
        .route("/api/examples/{slug}", get(handlers::get_example))
        .route("/api/examples/{slug}/images/{*name}", get(handlers::get_image))
        .route("/api/tags", get(handlers::tags))
        .route("/api/suggest", get(handlers::suggest))
        .route("/api/package", post(handlers::package))
        .route("/api/reload", post(handlers::reload))
        .route("/api", any(handlers::unknown_endpoint))
        .route("/api/{*rest}", any(handlers::unknown_endpoint))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => {
            let index = ServeFile::new(dir.join("index.html"));
            api.fallback_service(ServeDir::new(dir).fallback(index))
        }
        None => api,
    };
    app.layer(cors)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Resolves on SIGINT or SIGTERM.
pub async fn shutdown_signal() {
    let interrupt = tokio::signal::ctrl_c();
    let mut terminate =
        tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()).expect("SIGTERM handler");
    tokio::select! {
        _ = interrupt => {}
        _ = terminate.recv() => {}
    }
}

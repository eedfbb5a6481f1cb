//! HTTP/JSON front end for patch similarity search.
//!
//! Clients upload an image, poll its metadata until the index build finishes,
//! then query nearest patches by image coordinate and fetch patch thumbnails.
//! Every error response carries a JSON `{error, detail}` body.

mod error;
mod handlers;
pub mod session;

use std::future::Future;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::http::HeaderValue;
use axum::routing::{get, post};
use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::{Any, CorsLayer};

pub use error::ApiError;
use session::Registry;

pub const DEFAULT_MAX_SESSIONS: usize = 8;
pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub max_sessions: usize,
    pub max_upload_bytes: usize,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_sessions: DEFAULT_MAX_SESSIONS,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            cors_origin: None,
        }
    }
}

#[derive(Debug)]
pub struct AppState {
    pub sessions: Registry,
}

pub fn router(config: &ServiceConfig) -> Result<Router, ApiError> {
    let state = Arc::new(AppState {
        sessions: Registry::new(config.max_sessions),
    });
    let cors = match &config.cors_origin {
        None => CorsLayer::permissive(),
        Some(origin) => {
            let origin = HeaderValue::from_str(origin).map_err(|e| {
                ApiError::invalid_params(format!("invalid CORS origin '{origin}': {e}"))
            })?;
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods(Any)
                .allow_headers(Any)
        }
    };
    Ok(Router::new()
        .route("/healthz", get(handlers::health))
        .route("/images", post(handlers::upload))
        .route("/images/{id}/meta", get(handlers::meta))
        .route("/images/{id}/neighbors", get(handlers::neighbors))
        .route("/images/{id}/patch/{file}", get(handlers::patch_png))
        .fallback(handlers::no_route)
        .method_not_allowed_fallback(handlers::method_not_allowed)
        .layer(DefaultBodyLimit::max(config.max_upload_bytes))
        .layer(cors)
        .with_state(state))
}

/// Serves `app` (see [`router`]) until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
}

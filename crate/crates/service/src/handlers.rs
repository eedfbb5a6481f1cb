use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use patchknn_core::image::{decode, to_grayscale};
use patchknn_core::wire::{NeighborsResponse, UploadResponse};
use patchknn_core::{FeatureParams, GrayImage, PatchGrid, PatchIndex, QueryRequest, SearchMethod};
use serde_json::json;

use crate::error::ApiError;
use crate::session::{BuildState, Session};
use crate::AppState;

type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

const DEFAULT_PATCH_SIZE: usize = 32;
const DEFAULT_K: usize = 5;

pub async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

pub async fn no_route() -> ApiError {
    ApiError::not_found("no such route")
}

pub async fn method_not_allowed() -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "method_not_allowed",
        "method not allowed on this route",
    )
}

fn query_map(params: Params) -> Result<HashMap<String, String>, ApiError> {
    params
        .map(|Query(map)| map)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_query", e.body_text()))
}

fn parse_field<T: FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>, ApiError>
where
    T::Err: std::fmt::Display,
{
    map.get(key)
        .map(|raw| {
            raw.trim()
                .parse()
                .map_err(|e| ApiError::invalid_params(format!("{key}: cannot parse '{raw}': {e}")))
        })
        .transpose()
}

pub async fn upload(
    State(state): State<Arc<AppState>>,
    params: Params,
    body: Result<Bytes, BytesRejection>,
) -> Result<(StatusCode, Json<UploadResponse>), ApiError> {
    let body = body.map_err(|e| {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::new(e.status(), "payload_too_large", e.body_text())
        } else {
            ApiError::new(e.status(), "bad_body", e.body_text())
        }
    })?;
    let map = query_map(params)?;
    if body.is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "empty_body",
            "request body is empty",
        ));
    }

    let patch_size = parse_field::<usize>(&map, "patch_size")
        .map_err(|e| ApiError {
            code: "invalid_patch_size",
            ..e
        })?
        .unwrap_or(DEFAULT_PATCH_SIZE);
    let mut features = FeatureParams::default();
    for (key, value) in &map {
        if key != "patch_size" {
            features
                .apply_setting(key, value)
                .map_err(ApiError::from_params)?;
        }
    }
    features.validate().map_err(ApiError::from_params)?;

    let image = decode(&body)
        .and_then(|img| to_grayscale(&img))
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_image", e.to_string()))?;
    let grid = build_grid(image, patch_size, &features)?;

    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Arc::new(Session::new(id.clone(), grid));
    for old in state.sessions.insert(session.clone()) {
        tracing::info!(image_id = %old, "evicted session");
    }
    tracing::info!(image_id = %id, n_patches = session.meta().n_patches(), "building index");

    let builder = session.clone();
    let handle = tokio::task::spawn_blocking(move || {
        let outcome = PatchIndex::build(builder.grid(), &features).map_err(|e| e.to_string());
        if let Err(reason) = &outcome {
            tracing::warn!(image_id = %builder.id(), %reason, "index build failed");
        }
        builder.finish(outcome);
    });
    tokio::spawn(async move {
        if let Err(e) = handle.await {
            tracing::error!(error = %e, "index build task panicked");
        }
    });

    let status = session.state().status();
    Ok((
        StatusCode::ACCEPTED,
        Json(UploadResponse {
            image_id: id,
            status,
        }),
    ))
}

fn build_grid(
    image: GrayImage,
    patch_size: usize,
    features: &FeatureParams,
) -> Result<PatchGrid, ApiError> {
    let min = features.min_patch_size();
    if patch_size < min {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_patch_size",
            format!(
                "patch size {patch_size} is below {min}, the minimum for these feature settings"
            ),
        ));
    }
    PatchGrid::new(image, patch_size).map_err(ApiError::from_params)
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<Session>, ApiError> {
    state
        .sessions
        .get(id)
        .ok_or_else(|| ApiError::unknown_image(id))
}

fn ready_index(session: &Session) -> Result<Arc<PatchIndex>, ApiError> {
    match session.state() {
        BuildState::Ready(index) => Ok(index),
        BuildState::Pending => Err(ApiError::new(
            StatusCode::CONFLICT,
            "not_ready",
            format!("index for image '{}' is still building", session.id()),
        )),
        BuildState::Failed(reason) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "build_failed",
            format!("index build for image '{}' failed: {reason}", session.id()),
        )),
    }
}

pub async fn meta(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let session = lookup(&state, &id)?;
    Ok(Json(session.describe()).into_response())
}

pub async fn neighbors(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Params,
) -> Result<Json<NeighborsResponse>, ApiError> {
    let session = lookup(&state, &id)?;
    let map = query_map(params)?;
    let require = |key: &str| -> Result<usize, ApiError> {
        parse_field(&map, key)?
            .ok_or_else(|| ApiError::invalid_params(format!("missing query parameter '{key}'")))
    };
    let x = require("x")?;
    let y = require("y")?;
    let k = parse_field(&map, "k")?.unwrap_or(DEFAULT_K);
    let method: SearchMethod = parse_field(&map, "method")?.unwrap_or_default();
    let metric = parse_field(&map, "metric")?;
    let exclude_self = parse_field(&map, "exclude_self")?.unwrap_or(false);
    if k == 0 {
        return Err(ApiError::invalid_params("k must be >= 1"));
    }
    let meta = session.meta();
    let (gx, gy) = meta.clamp_to_grid(x, y).map_err(ApiError::from_params)?;
    let patch_id = meta.patch_id(gx, gy).map_err(ApiError::from_params)?;

    let index = ready_index(&session)?;
    let request = QueryRequest {
        patch_id,
        k,
        method,
        metric,
        exclude_self,
    };
    let result = index.query(&request).map_err(ApiError::from_params)?;
    Ok(Json(NeighborsResponse {
        requested_x: x,
        requested_y: y,
        clamped: (gx, gy) != (x, y),
        result,
    }))
}

pub async fn patch_png(
    State(state): State<Arc<AppState>>,
    Path((id, file)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let session = lookup(&state, &id)?;
    let stem = file.strip_suffix(".png").ok_or_else(|| {
        ApiError::not_found(format!(
            "unknown patch resource '{file}' (expected '<t>.png')"
        ))
    })?;
    let t: usize = stem
        .parse()
        .map_err(|e| ApiError::invalid_params(format!("patch id '{stem}': {e}")))?;
    ready_index(&session)?;
    let view = session.grid().view(t).map_err(ApiError::from_params)?;
    let p = view.size();
    let png = GrayImage::new(p, p, view.to_vec())
        .and_then(|img| img.encode_png())
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

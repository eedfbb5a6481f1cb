use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use patchknn_core::wire::ErrorBody;
use patchknn_core::Error;

/// A non-2xx response with a JSON `{error, detail}` body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub detail: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            detail: detail.into(),
        }
    }

    pub fn not_found(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", detail)
    }

    pub fn invalid_params(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_params", detail)
    }

    pub fn unknown_image(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_image",
            format!("no image with id '{id}'"),
        )
    }

    /// Maps a library error raised while validating request parameters.
    pub fn from_params(err: Error) -> Self {
        match err {
            Error::InvalidPatchSize { .. } => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_patch_size",
                err.to_string(),
            ),
            Error::Decode(_) | Error::EmptyInput(_) => {
                Self::new(StatusCode::BAD_REQUEST, "invalid_image", err.to_string())
            }
            Error::InvalidParams(_) | Error::OutOfBounds { .. } => {
                Self::invalid_params(err.to_string())
            }
            Error::Io { .. } | Error::Format(_) => Self::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "internal",
                err.to_string(),
            ),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code.to_string(),
            detail: self.detail,
        };
        (self.status, Json(body)).into_response()
    }
}

//! Thin async client for the patch similarity HTTP service.

use std::time::{Duration, Instant};

use patchknn_core::wire::{
    BuildStatus, ErrorBody, MetaResponse, NeighborsResponse, UploadResponse,
};
use patchknn_core::{Metric, SearchMethod};
use reqwest::{Response, StatusCode};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),

    #[error("service returned {status}: {} ({})", body.error, body.detail)]
    Api { status: u16, body: ErrorBody },

    #[error("index build failed: {0}")]
    BuildFailed(String),

    #[error("index not ready after {0:?}")]
    Timeout(Duration),
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// Query parameters for `/images/{id}/neighbors`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborsQuery {
    pub x: usize,
    pub y: usize,
    pub k: usize,
    pub method: SearchMethod,
    pub metric: Option<Metric>,
    pub exclude_self: bool,
}

impl NeighborsQuery {
    pub fn new(x: usize, y: usize, k: usize, method: SearchMethod) -> Self {
        NeighborsQuery {
            x,
            y,
            k,
            method,
            metric: None,
            exclude_self: false,
        }
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![
            ("x", self.x.to_string()),
            ("y", self.y.to_string()),
            ("k", self.k.to_string()),
            ("method", self.method.to_string()),
            ("exclude_self", self.exclude_self.to_string()),
        ];
        if let Some(metric) = self.metric {
            pairs.push(("metric", metric.to_string()));
        }
        pairs
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: &str) -> Self {
        Client {
            base: base_url.trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    /// Uploads image bytes (PNG or binary PGM). `settings` are feature
    /// overrides using the setting keys, e.g. `("glcm_levels", "16")`.
    pub async fn upload(
        &self,
        image: Vec<u8>,
        patch_size: usize,
        settings: &[(String, String)],
    ) -> Result<UploadResponse> {
        let mut query = vec![("patch_size".to_string(), patch_size.to_string())];
        query.extend(settings.iter().cloned());
        let resp = self
            .http
            .post(self.url("/images"))
            .query(&query)
            .body(image)
            .send()
            .await?;
        Ok(check(resp).await?.json().await?)
    }

    pub async fn meta(&self, image_id: &str) -> Result<MetaResponse> {
        let resp = self
            .http
            .get(self.url(&format!("/images/{image_id}/meta")))
            .send()
            .await?;
        Ok(check(resp).await?.json().await?)
    }

    /// Polls `/meta` until the build leaves the pending state.
    pub async fn wait_ready(&self, image_id: &str, timeout: Duration) -> Result<MetaResponse> {
        let start = Instant::now();
        let mut delay = Duration::from_millis(10);
        loop {
            let meta = self.meta(image_id).await?;
            match meta.status {
                BuildStatus::Ready => return Ok(meta),
                BuildStatus::Failed => {
                    return Err(ClientError::BuildFailed(meta.error.unwrap_or_default()))
                }
                BuildStatus::Pending if start.elapsed() >= timeout => {
                    return Err(ClientError::Timeout(timeout))
                }
                BuildStatus::Pending => {
                    tokio::time::sleep(delay).await;
                    delay = (delay * 2).min(Duration::from_millis(250));
                }
            }
        }
    }

    pub async fn neighbors(
        &self,
        image_id: &str,
        query: &NeighborsQuery,
    ) -> Result<NeighborsResponse> {
        let resp = self
            .http
            .get(self.url(&format!("/images/{image_id}/neighbors")))
            .query(&query.pairs())
            .send()
            .await?;
        Ok(check(resp).await?.json().await?)
    }

    /// PNG bytes of patch `t`.
    pub async fn patch_png(&self, image_id: &str, t: usize) -> Result<Vec<u8>> {
        let resp = self
            .http
            .get(self.url(&format!("/images/{image_id}/patch/{t}.png")))
            .send()
            .await?;
        Ok(check(resp).await?.bytes().await?.to_vec())
    }

    pub async fn health(&self) -> Result<()> {
        check(self.http.get(self.url("/healthz")).send().await?).await?;
        Ok(())
    }
}

async fn check(resp: Response) -> Result<Response> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let text = resp.text().await.unwrap_or_default();
    let body = serde_json::from_str(&text).unwrap_or_else(|_| ErrorBody {
        error: status
            .canonical_reason()
            .unwrap_or("error")
            .to_lowercase()
            .replace(' ', "_"),
        detail: text,
    });
    Err(ClientError::Api {
        status: status.as_u16(),
        body,
    })
}

impl ClientError {
    /// HTTP status for errors reported by the service.
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Api { status, .. } => StatusCode::from_u16(*status).ok(),
            ClientError::Http(e) => e.status(),
            _ => None,
        }
    }
}

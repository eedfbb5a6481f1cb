//! JSON bodies exchanged with the HTTP service.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildStatus {
    Pending,
    Ready,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadResponse {
    pub image_id: String,
    pub status: BuildStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaResponse {
    #[serde(rename = "M")]
    pub height: usize,
    #[serde(rename = "N")]
    pub width: usize,
    pub patch_size: usize,
    pub grid_w: usize,
    pub grid_h: usize,
    pub n_patches: usize,
    pub status: BuildStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

/// `/neighbors` response: the query result plus the click that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborsResponse {
    pub requested_x: usize,
    pub requested_y: usize,
    /// True when the click fell in the margin and was moved onto the grid.
    pub clamped: bool,
    #[serde(flatten)]
    pub result: crate::engine::QueryResult,
}

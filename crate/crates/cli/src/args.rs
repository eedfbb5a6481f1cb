use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use patchknn_core::{Metric, SearchMethod};

/// Texture-feature nearest-patch search over image patches.
///
/// Log verbosity follows the PATCHKNN_LOG environment variable
/// (e.g. `PATCHKNN_LOG=debug`).
#[derive(Debug, Parser)]
#[command(name = "patchknn", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract features for every patch and write an index file.
    Index(IndexArgs),
    /// Find the k patches nearest to the patch at (x, y).
    Query(QueryArgs),
    /// Time brute-force cosine search against kd-tree search.
    Bench(BenchArgs),
    /// Print the raw nine features of one patch.
    Features(FeaturesArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// File of `key = value` feature settings, applied before the flags below.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lbp_points: Option<u32>,
    #[arg(long)]
    pub lbp_radius: Option<u32>,
    /// GLCM displacement as `rows,cols`.
    #[arg(long, value_name = "DA,DB", allow_hyphen_values = true)]
    pub glcm_offset: Option<String>,
    #[arg(long)]
    pub glcm_levels: Option<u32>,
    #[arg(long)]
    pub gabor_lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gabor_theta: Option<f64>,
    #[arg(long)]
    pub gabor_sigma: Option<f64>,
    #[arg(long)]
    pub gabor_gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gabor_psi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Where to write the index file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub patch_size: usize,
    #[command(flatten)]
    pub features: FeatureArgs,
}

/// Where the patch index comes from: a saved index file, or an image indexed
/// on the fly. With both, the image is only used for drawing.
#[derive(Debug, Args)]
pub struct SourceArgs {
    #[arg(long, required_unless_present = "image")]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Patch size when indexing an image (default 32); must match a loaded index.
    #[arg(long)]
    pub patch_size: Option<usize>,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Row of the clicked pixel.
    #[arg(long)]
    pub x: usize,
    /// Column of the clicked pixel.
    #[arg(long)]
    pub y: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = SearchMethod::KdTree)]
    pub method: SearchMethod,
    /// Defaults to cosine for brute and euclidean for kdtree.
    #[arg(long)]
    pub metric: Option<Metric>,
    /// Leave the query patch itself out of the results.
    #[arg(long)]
    pub exclude_self: bool,
    /// Write the image with neighbor outlines drawn (needs --image).
    #[arg(long)]
    pub out_image: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// Run the query on a running service instead of locally (needs --image).
    #[arg(long, value_name = "URL", conflicts_with = "index")]
    pub server: Option<String>,
    /// Seconds to wait for the service to finish indexing.
    #[arg(long, default_value_t = 300)]
    pub server_timeout: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Query patch id; defaults to the patch at (--x, --y), or the center patch.
    #[arg(long, conflicts_with_all = ["x", "y"])]
    pub query_id: Option<usize>,
    #[arg(long, requires = "y")]
    pub x: Option<usize>,
    #[arg(long, requires = "x")]
    pub y: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Timed runs per method; medians are reported.
    #[arg(long, default_value_t = 51)]
    pub repeats: usize,
    /// Skip the per-rank distance/time curve.
    #[arg(long)]
    pub no_curve: bool,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub x: usize,
    #[arg(long)]
    pub y: usize,
    #[arg(long, default_value_t = 32)]
    pub patch_size: usize,
    /// Print JSON instead of `name: value` lines.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// 0 picks a free port.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value_t = patchknn_service::DEFAULT_MAX_SESSIONS)]
    pub max_sessions: usize,
    #[arg(long, default_value_t = patchknn_service::DEFAULT_MAX_UPLOAD_BYTES)]
    pub max_upload_bytes: usize,
    /// Only allow this browser origin; any origin is allowed by default.
    #[arg(long)]
    pub cors_origin: Option<String>,
}

//! Texture-feature patch similarity search.
//!
//! Every overlapping square patch of a grayscale image is described by nine
//! texture statistics (LBP, GLCM and Gabor). The min-max normalized feature
//! matrix is searched with an exact brute-force scan (cosine or euclidean) or
//! an exact kd-tree (euclidean).

pub mod config;
pub mod engine;
pub mod error;
pub mod features;
pub mod grid;
pub mod image;
pub mod nnsearch;
pub mod store;
pub mod synth;
pub mod wire;

pub use engine::{NeighborHit, PatchIndex, QueryRequest, QueryResult, SearchMethod};
pub use error::{Error, FormatError, Result};
pub use features::{FeatureMatrix, FeatureParams, FeatureVector, FEATURE_NAMES, N_FEATURES};
pub use grid::{GridMeta, PatchGrid, PatchView};
pub use image::GrayImage;
pub use nnsearch::{BenchOptions, BenchReport, KdTree, Metric, Neighbor};

//! Nine texture features per patch: LBP energy/entropy, five GLCM statistics
//! and Gabor energy/entropy.

pub mod gabor;
pub mod glcm;
pub mod histogram;
pub mod lbp;
mod matrix;
pub mod params;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gabor::{gabor_features, gabor_kernel, GaborKernel};
pub use glcm::{glcm, glcm_metrics, Glcm, GlcmMetrics};
pub use histogram::{hist_energy, hist_entropy, normalized_histogram};
pub use lbp::{lbp_code, lbp_features, lbp_map, LbpMap};
pub use matrix::{FeatureMatrix, NormState};
pub use params::{FeatureParams, GaborParams, GlcmParams, LbpParams, Padding};

use crate::error::{Error, Result};
use crate::grid::{PatchGrid, PatchView};

pub const N_FEATURES: usize = 9;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "lbp_energy",
    "lbp_entropy",
    "glcm_contrast",
    "glcm_dissimilarity",
    "glcm_homogeneity",
    "glcm_energy",
    "glcm_correlation",
    "gabor_energy",
    "gabor_entropy",
];

/// Raw feature values in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; N_FEATURES] {
        &self.0
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.0.iter().copied())
    }
}

/// Extractor with the LBP sampling pattern and Gabor kernel prepared once.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    params: FeatureParams,
    lbp_offsets: Vec<(isize, isize)>,
    kernel: GaborKernel,
}

impl FeatureExtractor {
    pub fn new(params: FeatureParams) -> Result<Self> {
        params.validate()?;
        Ok(FeatureExtractor {
            lbp_offsets: lbp::neighbor_offsets(&params.lbp),
            kernel: GaborKernel::new(&params.gabor)?,
            params,
        })
    }

    pub fn params(&self) -> &FeatureParams {
        &self.params
    }

    pub fn extract(&self, patch: &PatchView<'_>) -> Result<FeatureVector> {
        let (lbp_energy, lbp_entropy) =
            lbp::lbp_features_with(patch, &self.params.lbp, &self.lbp_offsets)?;
        let m = glcm::glcm(patch, &self.params.glcm)?;
        let g = if self.params.glcm.normalize {
            glcm_metrics(&m)?
        } else {
            // metrics are defined on probabilities only
            let total = m.sum();
            let dense: Vec<f64> = m.to_dense().iter().map(|v| v / total).collect();
            glcm_metrics(&Glcm::from_dense(m.levels(), &dense)?)?
        };
        let (gabor_energy, gabor_entropy) =
            gabor::gabor_features_with(patch, &self.params.gabor, &self.kernel);
        Ok(FeatureVector([
            lbp_energy,
            lbp_entropy,
            g.contrast,
            g.dissimilarity,
            g.homogeneity,
            g.energy,
            g.correlation,
            gabor_energy,
            gabor_entropy,
        ]))
    }
}

pub fn feature_vector(patch: &PatchView<'_>, params: &FeatureParams) -> Result<FeatureVector> {
    FeatureExtractor::new(*params)?.extract(patch)
}

/// Raw feature matrix with row `t` holding the features of patch `t`.
/// Rows are computed in parallel.
pub fn build_feature_matrix(grid: &PatchGrid, params: &FeatureParams) -> Result<FeatureMatrix> {
    let min = params.min_patch_size();
    if grid.patch_size() < min {
        return Err(Error::params(format!(
            "patch size {} is below the minimum {min} required by the feature parameters",
            grid.patch_size()
        )));
    }
    let extractor = FeatureExtractor::new(*params)?;
    let rows = (0..grid.len())
        .into_par_iter()
        .map(|id| extractor.extract(&grid.view(id)?).map(|v| v.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix::from_raw_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::GrayImage;

    #[test]
    fn constant_patch_vector() {
        for value in [0u8, 1, 128, 255] {
            let img = GrayImage::from_fn(32, 32, |_, _| value).unwrap();
            let v =
                feature_vector(&PatchView::full(&img).unwrap(), &FeatureParams::default()).unwrap();
            assert_eq!(
                v.0,
                [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0],
                "value {value}"
            );
        }
    }

    #[test]
    fn unnormalized_glcm_setting_gives_same_features() {
        let img = GrayImage::from_fn(16, 16, |r, c| ((r * 13) ^ (c * 7)) as u8).unwrap();
        let view = PatchView::full(&img).unwrap();
        let mut raw = FeatureParams::default();
        raw.glcm.normalize = false;
        let a = feature_vector(&view, &FeatureParams::default()).unwrap();
        let b = feature_vector(&view, &raw).unwrap();
        for (x, y) in a.0.iter().zip(b.0.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn patch_below_minimum_rejected() {
        let img = GrayImage::from_fn(8, 8, |r, c| (r + c) as u8).unwrap();
        let grid = PatchGrid::new(img, 2).unwrap();
        assert!(matches!(
            build_feature_matrix(&grid, &FeatureParams::default()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn single_patch_matrix() {
        let img = GrayImage::from_fn(32, 32, |r, c| (r * 8 + c) as u8).unwrap();
        let grid = PatchGrid::new(img, 32).unwrap();
        let m = build_feature_matrix(&grid, &FeatureParams::default()).unwrap();
        assert_eq!(m.n_rows(), 1);
        assert_eq!(
            m.row(0),
            &feature_vector(&grid.view(0).unwrap(), &FeatureParams::default())
                .unwrap()
                .0
        );
    }
}

//! Gray-level co-occurrence matrices and Haralick statistics.
//!
//! A patch contributes at most `p * p` pairs, so the matrix is kept sparse:
//! a sorted list of non-zero cells. A dense 256x256 matrix per patch would
//! dominate feature extraction time.

use serde::Serialize;

use super::params::GlcmParams;
use crate::error::{Error, Result};
use crate::grid::PatchView;

/// Tolerance on the total mass of a normalized matrix.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    levels: usize,
    /// Non-zero cells `(i, j, value)`, sorted by `(i, j)`.
    cells: Vec<(u16, u16, f64)>,
}

impl Glcm {
    /// Builds from a dense row-major `levels x levels` matrix.
    pub fn from_dense(levels: usize, values: &[f64]) -> Result<Self> {
        if levels == 0 || levels > 256 || values.len() != levels * levels {
            return Err(Error::params(format!(
                "dense GLCM needs {levels}x{levels} values, got {}",
                values.len()
            )));
        }
        let cells = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(k, &v)| ((k / levels) as u16, (k % levels) as u16, v))
            .collect();
        Ok(Glcm { levels, cells })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells
            .binary_search_by(|&(a, b, _)| (a as usize, b as usize).cmp(&(i, j)))
            .map(|k| self.cells[k].2)
            .unwrap_or(0.0)
    }

    pub fn cells(&self) -> &[(u16, u16, f64)] {
        &self.cells
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.levels * self.levels];
        for &(i, j, v) in &self.cells {
            out[i as usize * self.levels + j as usize] = v;
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.cells.iter().map(|c| c.2).sum()
    }
}

#[inline]
fn quantize(v: u8, levels: usize) -> u16 {
    (v as usize * levels / 256) as u16
}

/// Counts pixel pairs `(I(a, b), I(a + da, b + db))` with both positions in the patch.
pub fn glcm(patch: &PatchView<'_>, params: &GlcmParams) -> Result<Glcm> {
    params.validate()?;
    let size = patch.size() as isize;
    let (da, db) = (params.offset.0 as isize, params.offset.1 as isize);
    // reference positions whose displaced partner is also inside the patch
    let rows = (-da).max(0)..size.min(size - da);
    let cols = (-db).max(0)..size.min(size - db);
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::params(format!(
            "no pixel pairs at offset {:?} inside a {size}x{size} patch",
            params.offset
        )));
    }

    let levels = params.levels;
    let key = |i: u16, j: u16| (i as u32) << 16 | j as u32;
    let mut keys = Vec::with_capacity(rows.len() * cols.len() * (1 + params.symmetric as usize));
    for a in rows.clone() {
        let reference = patch.row(a as usize);
        let neighbor = patch.row((a + da) as usize);
        for b in cols.clone() {
            let i = quantize(reference[b as usize], levels);
            let j = quantize(neighbor[(b + db) as usize], levels);
            keys.push(key(i, j));
            if params.symmetric {
                keys.push(key(j, i));
            }
        }
    }
    keys.sort_unstable();

    let total = keys.len() as f64;
    let mut cells: Vec<(u16, u16, f64)> = Vec::new();
    for chunk in keys.chunk_by(|a, b| a == b) {
        let k = chunk[0];
        let count = chunk.len() as f64;
        let v = if params.normalize {
            count / total
        } else {
            count
        };
        cells.push(((k >> 16) as u16, (k & 0xffff) as u16, v));
    }
    Ok(Glcm { levels, cells })
}

/// The five Haralick statistics used as features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlcmMetrics {
    pub contrast: f64,
    pub dissimilarity: f64,
    pub homogeneity: f64,
    /// Square root of the angular second moment.
    pub energy: f64,
    /// 1 when either marginal has zero variance.
    pub correlation: f64,
}

pub fn glcm_metrics(m: &Glcm) -> Result<GlcmMetrics> {
    let sum = m.sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::params(format!(
            "GLCM must be normalized (entries sum to {sum})"
        )));
    }
    let mut contrast = 0.0;
    let mut dissimilarity = 0.0;
    let mut homogeneity = 0.0;
    let mut asm = 0.0;
    let mut mean_i = 0.0;
    let mut mean_j = 0.0;
    for &(i, j, p) in &m.cells {
        let d = i as f64 - j as f64;
        contrast += p * d * d;
        dissimilarity += p * d.abs();
        homogeneity += p / (1.0 + d * d);
        asm += p * p;
        mean_i += p * i as f64;
        mean_j += p * j as f64;
    }

    // A marginal with a single support level has exactly zero variance; checking
    // that directly avoids dividing round-off noise by round-off noise.
    let first = m.cells.first().map(|c| (c.0, c.1)).unwrap_or((0, 0));
    let single_i = m.cells.iter().all(|c| c.0 == first.0);
    let single_j = m.cells.iter().all(|c| c.1 == first.1);
    let correlation = if single_i || single_j {
        1.0
    } else {
        let mut var_i = 0.0;
        let mut var_j = 0.0;
        let mut cov = 0.0;
        for &(i, j, p) in &m.cells {
            let di = i as f64 - mean_i;
            let dj = j as f64 - mean_j;
            var_i += p * di * di;
            var_j += p * dj * dj;
            cov += p * di * dj;
        }
        (cov / (var_i.sqrt() * var_j.sqrt())).clamp(-1.0, 1.0)
    };

    Ok(GlcmMetrics {
        contrast,
        dissimilarity,
        homogeneity: homogeneity.min(1.0),
        energy: asm.sqrt().min(1.0),
        correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::GrayImage;
    use proptest::prelude::*;

    fn checkerboard(size: usize) -> GrayImage {
        GrayImage::from_fn(size, size, |r, c| ((r + c) % 2) as u8).unwrap()
    }

    /// Dense reference GLCM by direct enumeration of every position pair.
    fn dense_oracle(
        img: &GrayImage,
        offset: (i32, i32),
        levels: usize,
        symmetric: bool,
    ) -> Vec<f64> {
        let n = img.height() as i64;
        let mut m = vec![0.0; levels * levels];
        let mut total = 0.0;
        for a in 0..n {
            for b in 0..n {
                let (a2, b2) = (a + offset.0 as i64, b + offset.1 as i64);
                if a2 < 0 || b2 < 0 || a2 >= n || b2 >= n {
                    continue;
                }
                let i = img.get(a as usize, b as usize) as usize * levels / 256;
                let j = img.get(a2 as usize, b2 as usize) as usize * levels / 256;
                m[i * levels + j] += 1.0;
                total += 1.0;
                if symmetric {
                    m[j * levels + i] += 1.0;
                    total += 1.0;
                }
            }
        }
        m.iter().map(|v| v / total).collect()
    }

    #[test]
    fn constant_patch_counts() {
        let img = GrayImage::from_fn(4, 4, |_, _| 77).unwrap();
        let view = PatchView::full(&img).unwrap();
        let raw = glcm(
            &view,
            &GlcmParams {
                normalize: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(raw.cells(), &[(77, 77, 12.0)]);
        let norm = glcm(&view, &GlcmParams::default()).unwrap();
        assert_eq!(norm.get(77, 77), 1.0);
        let metrics = glcm_metrics(&norm).unwrap();
        assert_eq!(
            (
                metrics.contrast,
                metrics.dissimilarity,
                metrics.homogeneity,
                metrics.energy,
                metrics.correlation
            ),
            (0.0, 0.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn checkerboard_matrix_and_metrics() {
        let img = checkerboard(4);
        let m = glcm(&PatchView::full(&img).unwrap(), &GlcmParams::default()).unwrap();
        assert_eq!(m.cells(), &[(0, 1, 0.5), (1, 0, 0.5)]);
        let metrics = glcm_metrics(&m).unwrap();
        assert!((metrics.contrast - 1.0).abs() < 1e-12);
        assert!((metrics.dissimilarity - 1.0).abs() < 1e-12);
        assert!((metrics.homogeneity - 0.5).abs() < 1e-12);
        assert!((metrics.energy - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((metrics.correlation + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_rejected() {
        let img = checkerboard(4);
        let raw = glcm(
            &PatchView::full(&img).unwrap(),
            &GlcmParams {
                normalize: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(glcm_metrics(&raw).is_err());
    }

    #[test]
    fn offset_too_large() {
        let img = checkerboard(4);
        let params = GlcmParams {
            offset: (0, 4),
            ..Default::default()
        };
        assert!(glcm(&PatchView::full(&img).unwrap(), &params).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let img = GrayImage::from_fn(9, 9, |r, c| (r * 29 + c * 53) as u8).unwrap();
        let m = glcm(
            &PatchView::full(&img).unwrap(),
            &GlcmParams {
                levels: 16,
                ..Default::default()
            },
        )
        .unwrap();
        let back = Glcm::from_dense(16, &m.to_dense()).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #[test]
        fn matches_dense_oracle(
            pixels in prop::collection::vec(any::<u8>(), 36),
            da in -3i32..=3,
            db in -3i32..=3,
            levels in prop::sample::select(vec![2usize, 8, 16, 256]),
            symmetric in any::<bool>(),
        ) {
            prop_assume!((da, db) != (0, 0));
            let img = GrayImage::new(6, 6, pixels).unwrap();
            let params = GlcmParams { offset: (da, db), levels, symmetric, normalize: true };
            let m = glcm(&PatchView::full(&img).unwrap(), &params).unwrap();
            let oracle = dense_oracle(&img, (da, db), levels, symmetric);
            for (k, (&a, &b)) in m.to_dense().iter().zip(&oracle).enumerate() {
                prop_assert!((a - b).abs() < 1e-15, "cell {} differs: {} vs {}", k, a, b);
            }
            prop_assert!((m.sum() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn metric_ranges(weights in prop::collection::vec(0.0f64..1.0, 64)) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 0.0);
            let dense: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let m = Glcm::from_dense(8, &dense).unwrap();
            let g = glcm_metrics(&m).unwrap();
            prop_assert!(g.contrast >= 0.0);
            prop_assert!(g.dissimilarity >= 0.0);
            prop_assert!(g.homogeneity > 0.0 && g.homogeneity <= 1.0);
            prop_assert!(g.energy > 0.0 && g.energy <= 1.0);
            prop_assert!((-1.0..=1.0).contains(&g.correlation));
        }
    }
}

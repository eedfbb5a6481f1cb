use serde::{Deserialize, Serialize};

use super::N_FEATURES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum NormState {
    Raw,
    /// Per-column `(min, max)` of the raw values the matrix was scaled from.
    Normalized {
        min: [f64; N_FEATURES],
        max: [f64; N_FEATURES],
    },
}

/// `N_p x 9` matrix of patch features, one row per patch id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<[f64; N_FEATURES]>,
    state: NormState,
}

impl FeatureMatrix {
    pub fn from_raw_rows(rows: Vec<[f64; N_FEATURES]>) -> Self {
        FeatureMatrix {
            rows,
            state: NormState::Raw,
        }
    }

    /// Reassembles an already normalized matrix, e.g. when loading from disk.
    pub fn from_normalized_parts(
        rows: Vec<[f64; N_FEATURES]>,
        min: [f64; N_FEATURES],
        max: [f64; N_FEATURES],
    ) -> Self {
        FeatureMatrix {
            rows,
            state: NormState::Normalized { min, max },
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        N_FEATURES
    }

    pub fn row(&self, i: usize) -> &[f64; N_FEATURES] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[[f64; N_FEATURES]] {
        &self.rows
    }

    pub fn state(&self) -> &NormState {
        &self.state
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self.state, NormState::Normalized { .. })
    }

    /// Per-column min-max scaling into `[0, 1]`. Constant columns become zero.
    /// Already-normalized matrices are returned unchanged.
    pub fn normalize_minmax(&self) -> FeatureMatrix {
        if self.is_normalized() {
            return self.clone();
        }
        let mut min = [f64::INFINITY; N_FEATURES];
        let mut max = [f64::NEG_INFINITY; N_FEATURES];
        for row in &self.rows {
            for j in 0..N_FEATURES {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        if self.rows.is_empty() {
            min = [0.0; N_FEATURES];
            max = [0.0; N_FEATURES];
        }
        let rows = self
            .rows
            .iter()
            .map(|row| scale_row(row, &min, &max))
            .collect();
        FeatureMatrix {
            rows,
            state: NormState::Normalized { min, max },
        }
    }

    /// Applies this matrix's stored scaling to an external raw vector,
    /// clamping into `[0, 1]`. Returns `None` for a raw matrix.
    pub fn normalize_vector(&self, raw: &[f64; N_FEATURES]) -> Option<[f64; N_FEATURES]> {
        match &self.state {
            NormState::Raw => None,
            NormState::Normalized { min, max } => {
                let mut out = scale_row(raw, min, max);
                for v in &mut out {
                    *v = v.clamp(0.0, 1.0);
                }
                Some(out)
            }
        }
    }
}

fn scale_row(
    row: &[f64; N_FEATURES],
    min: &[f64; N_FEATURES],
    max: &[f64; N_FEATURES],
) -> [f64; N_FEATURES] {
    let mut out = [0.0; N_FEATURES];
    for j in 0..N_FEATURES {
        let span = max[j] - min[j];
        out[j] = if span > 0.0 {
            (row[j] - min[j]) / span
        } else {
            0.0
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_raw_rows(
            values
                .iter()
                .map(|&v| {
                    let mut r = [7.0; N_FEATURES];
                    r[0] = v;
                    r
                })
                .collect(),
        )
    }

    #[test]
    fn affine_column() {
        let m = column(&[2.0, 4.0, 6.0]).normalize_minmax();
        let col: Vec<f64> = m.rows().iter().map(|r| r[0]).collect();
        assert_eq!(col, vec![0.0, 0.5, 1.0]);
        // constant column
        assert!(m.rows().iter().all(|r| r[1] == 0.0));
        match m.state() {
            NormState::Normalized { min, max } => {
                assert_eq!((min[0], max[0]), (2.0, 6.0));
                assert_eq!((min[1], max[1]), (7.0, 7.0));
            }
            NormState::Raw => panic!("not normalized"),
        }
    }

    #[test]
    fn normalize_vector_uses_stored_range() {
        let m = column(&[2.0, 4.0, 6.0]).normalize_minmax();
        let mut raw = [7.0; N_FEATURES];
        raw[0] = 5.0;
        assert_eq!(m.normalize_vector(&raw).unwrap()[0], 0.75);
        raw[0] = 100.0;
        assert_eq!(m.normalize_vector(&raw).unwrap()[0], 1.0);
        assert!(column(&[1.0]).normalize_vector(&raw).is_none());
    }

    proptest! {
        #[test]
        fn range_and_idempotence(rows in prop::collection::vec(prop::array::uniform9(-1e3f64..1e3), 1..60)) {
            let once = FeatureMatrix::from_raw_rows(rows).normalize_minmax();
            for row in once.rows() {
                prop_assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
            }
            for j in 0..N_FEATURES {
                let col: Vec<f64> = once.rows().iter().map(|r| r[j]).collect();
                let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo == 0.0 && (hi == 1.0 || hi == 0.0));
            }
            let twice = FeatureMatrix::from_raw_rows(once.rows().to_vec()).normalize_minmax();
            prop_assert_eq!(twice.rows(), once.rows());
            prop_assert_eq!(once.normalize_minmax(), once.clone());
        }
    }
}

//! Exact k-nearest-neighbor search over feature rows.
//!
//! Every result list is ordered by `(distance, id)` ascending, so ties are
//! broken by the smaller patch id and repeated queries are reproducible.

mod bench;
mod brute;
mod kdtree;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bench::{benchmark, BenchEntry, BenchOptions, BenchReport, CurvePoint};
pub use brute::{brute_knn, brute_knn_vector};
pub use kdtree::{KdNode, KdTree, DEFAULT_LEAF_CAPACITY};

use crate::error::{Error, Result};
use crate::features::N_FEATURES;

pub type Point = [f64; N_FEATURES];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cosine,
    Euclidean,
}

impl Metric {
    #[inline]
    pub fn distance(self, a: &Point, b: &Point) -> f64 {
        match self {
            Metric::Cosine => cosine_distance(a, b),
            Metric::Euclidean => euclidean_distance(a, b),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Cosine => "cosine",
            Metric::Euclidean => "euclidean",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::params(format!(
                "unknown metric '{other}' (expected cosine or euclidean)"
            ))),
        }
    }
}

/// `1 - cos(angle)`, in `[0, 2]`. Two zero vectors are at distance 0; a zero
/// vector and a non-zero one at distance 1.
#[inline]
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    match (na == 0.0, nb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): for a == b it is
        // exactly na, so self-distance is exactly zero.
        _ => 1.0 - (dot / (na * nb).sqrt()).clamp(-1.0, 1.0),
    }
}

#[inline]
pub(crate) fn squared_euclidean(a: &Point, b: &Point) -> f64 {
    let mut s = 0.0;
    for i in 0..N_FEATURES {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

#[inline]
pub fn euclidean_distance(a: &Point, b: &Point) -> f64 {
    squared_euclidean(a, b).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

impl Neighbor {
    #[inline]
    pub(crate) fn order(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.id.cmp(&other.id))
    }
}

// Max-heap adapter keyed on (distance, id).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate(pub Neighbor);

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.order(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(i: usize) -> Point {
        let mut p = [0.0; N_FEATURES];
        p[i] = 1.0;
        p
    }

    #[test]
    fn cosine_examples() {
        let a = [0.3, 0.1, 0.9, 0.0, 0.5, 0.2, 0.7, 0.4, 0.6];
        assert_eq!(cosine_distance(&a, &a), 0.0);
        assert_eq!(cosine_distance(&unit(0), &unit(1)), 1.0);
        let mut b = unit(0);
        b[1] = 1.0;
        assert!((cosine_distance(&b, &unit(0)) - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-15);
        let neg: Point = a.map(|v| -v);
        assert!((cosine_distance(&a, &neg) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_zero_conventions() {
        let z = [0.0; N_FEATURES];
        assert_eq!(cosine_distance(&z, &z), 0.0);
        assert_eq!(cosine_distance(&z, &unit(3)), 1.0);
        assert_eq!(cosine_distance(&unit(3), &z), 1.0);
    }

    #[test]
    fn metric_parse_display() {
        for m in [Metric::Cosine, Metric::Euclidean] {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
        assert!("manhattan".parse::<Metric>().is_err());
    }

    proptest! {
        #[test]
        fn cosine_contract(a in prop::array::uniform9(-1.0f64..1.0), b in prop::array::uniform9(-1.0f64..1.0), scale in 1e-3f64..1e3) {
            let d = cosine_distance(&a, &b);
            prop_assert!((0.0..=2.0).contains(&d));
            prop_assert_eq!(d, cosine_distance(&b, &a));
            if a.iter().any(|&v| v != 0.0) {
                prop_assert_eq!(cosine_distance(&a, &a), 0.0);
            }
            let scaled: Point = a.map(|v| v * scale);
            prop_assert!((cosine_distance(&scaled, &b) - d).abs() < 1e-12);
        }
    }
}

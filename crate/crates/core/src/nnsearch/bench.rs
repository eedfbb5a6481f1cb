//! Timing comparison of brute-force cosine search against kd-tree search.
//!
//! "Speed" here is the k-th neighbor distance divided by the query time,
//! `d_max / t_max`, reported per method alongside the time ratio.

use std::hint::black_box;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{brute_knn, KdTree, Metric, Neighbor};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Floor applied to measured times so speeds stay finite.
const MIN_ELAPSED_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    /// Timed runs per method; the median is reported.
    pub repeats: usize,
    /// Also time the top-j search for each j in 1..=k.
    pub curve: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            repeats: 51,
            curve: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub method: String,
    pub metric: Metric,
    pub elapsed_s: f64,
    pub d_max: f64,
    pub speed: f64,
    /// Brute-force time divided by this method's time.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub method: String,
    pub rank: usize,
    pub distance: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub query_id: usize,
    pub k: usize,
    pub n_patches: usize,
    pub repeats: usize,
    pub methods: Vec<BenchEntry>,
    /// Brute-force elapsed / kd-tree elapsed.
    pub speedup: f64,
    /// Whether brute-force euclidean and kd-tree returned identical lists.
    pub euclidean_agreement: bool,
    pub curve: Vec<CurvePoint>,
}

impl BenchReport {
    pub fn entry(&self, method: &str) -> Option<&BenchEntry> {
        self.methods.iter().find(|e| e.method == method)
    }
}

fn median_time<T>(repeats: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let out = black_box(f());
        times.push(start.elapsed());
        last = Some(out);
    }
    times.sort_unstable();
    let mid: Duration = times[times.len() / 2];
    (
        mid.as_secs_f64().max(MIN_ELAPSED_S),
        last.expect("at least one run"),
    )
}

pub fn benchmark(
    matrix: &FeatureMatrix,
    tree: &KdTree,
    query: usize,
    k: usize,
    options: BenchOptions,
) -> Result<BenchReport> {
    if k == 0 {
        return Err(Error::params("k must be >= 1"));
    }
    if tree.len() != matrix.n_rows() {
        return Err(Error::params("kd-tree and matrix sizes differ"));
    }
    // validates the query id
    brute_knn(matrix, query, 1, Metric::Cosine, false)?;
    let q = *matrix.row(query);

    let run_brute =
        |k: usize| brute_knn(matrix, query, k, Metric::Cosine, false).expect("validated");
    let run_kd = |k: usize| tree.knn(&q, k).expect("validated");

    let (brute_s, brute) = median_time(options.repeats, || run_brute(k));
    let (kd_s, kd) = median_time(options.repeats, || run_kd(k));

    let reference = brute_knn(matrix, query, k, Metric::Euclidean, false)?;
    let euclidean_agreement = reference == kd;

    let d_max = |list: &[Neighbor]| list.last().map_or(0.0, |n| n.distance);
    let entry = |method: &str, metric, elapsed_s: f64, list: &[Neighbor]| BenchEntry {
        method: method.to_string(),
        metric,
        elapsed_s,
        d_max: d_max(list),
        speed: d_max(list) / elapsed_s,
        speedup: brute_s / elapsed_s,
    };
    let methods = vec![
        entry("brute", Metric::Cosine, brute_s, &brute),
        entry("kdtree", Metric::Euclidean, kd_s, &kd),
    ];

    let mut curve = Vec::new();
    if options.curve {
        let reps = (options.repeats / 5).max(3);
        for rank in 1..=brute.len() {
            let (t, list) = median_time(reps, || run_brute(rank));
            curve.push(CurvePoint {
                method: "brute".into(),
                rank,
                distance: d_max(&list),
                elapsed_s: t,
            });
        }
        for rank in 1..=kd.len() {
            let (t, list) = median_time(reps, || run_kd(rank));
            curve.push(CurvePoint {
                method: "kdtree".into(),
                rank,
                distance: d_max(&list),
                elapsed_s: t,
            });
        }
    }

    Ok(BenchReport {
        query_id: query,
        k,
        n_patches: matrix.n_rows(),
        repeats: options.repeats.max(1),
        methods,
        speedup: brute_s / kd_s,
        euclidean_agreement,
        curve,
    })
}

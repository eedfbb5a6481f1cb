//! A built, queryable patch index: grid metadata, normalized features and kd-tree.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{build_feature_matrix, FeatureMatrix, FeatureParams};
use crate::grid::{GridMeta, PatchGrid};
use crate::image::Rect;
use crate::nnsearch::{benchmark, brute_knn, BenchOptions, BenchReport, KdTree, Metric, Neighbor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Brute,
    #[default]
    KdTree,
}

impl SearchMethod {
    /// Metric used when the caller does not pick one.
    pub fn default_metric(self) -> Metric {
        match self {
            SearchMethod::Brute => Metric::Cosine,
            SearchMethod::KdTree => Metric::Euclidean,
        }
    }
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMethod::Brute => "brute",
            SearchMethod::KdTree => "kdtree",
        })
    }
}

impl FromStr for SearchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(SearchMethod::Brute),
            "kdtree" => Ok(SearchMethod::KdTree),
            other => Err(Error::params(format!(
                "unknown method '{other}' (expected brute or kdtree)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRequest {
    pub patch_id: usize,
    pub k: usize,
    pub method: SearchMethod,
    pub metric: Option<Metric>,
    pub exclude_self: bool,
}

impl QueryRequest {
    pub fn new(patch_id: usize, k: usize, method: SearchMethod) -> Self {
        QueryRequest {
            patch_id,
            k,
            method,
            metric: None,
            exclude_self: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborHit {
    pub id: usize,
    pub x: usize,
    pub y: usize,
    pub distance: f64,
}

/// Ranked neighbors of one query patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query_id: usize,
    /// Top-left of the query patch.
    pub x: usize,
    pub y: usize,
    pub method: SearchMethod,
    pub metric: Metric,
    pub k: usize,
    pub exclude_self: bool,
    pub neighbors: Vec<NeighborHit>,
    pub elapsed_s: f64,
}

impl QueryResult {
    pub fn ids(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.id).collect()
    }

    /// Outline rectangles for every neighbor, in rank order.
    pub fn rects(&self, patch_size: usize) -> Vec<Rect> {
        self.neighbors
            .iter()
            .map(|n| Rect {
                x: n.x,
                y: n.y,
                size: patch_size,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PatchIndex {
    meta: GridMeta,
    matrix: FeatureMatrix,
    tree: KdTree,
}

impl PatchIndex {
    /// Extracts features for every patch, normalizes, and builds the kd-tree.
    pub fn build(grid: &PatchGrid, params: &FeatureParams) -> Result<Self> {
        let raw = build_feature_matrix(grid, params)?;
        Self::from_matrix(grid.meta(), raw.normalize_minmax())
    }

    pub fn from_matrix(meta: GridMeta, matrix: FeatureMatrix) -> Result<Self> {
        if !matrix.is_normalized() {
            return Err(Error::params("index requires a normalized feature matrix"));
        }
        if matrix.n_rows() != meta.n_patches() {
            return Err(Error::params(format!(
                "matrix has {} rows, grid has {} patches",
                matrix.n_rows(),
                meta.n_patches()
            )));
        }
        let tree = KdTree::build(&matrix)?;
        Ok(PatchIndex { meta, matrix, tree })
    }

    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        &self.matrix
    }

    pub fn tree(&self) -> &KdTree {
        &self.tree
    }

    pub fn query(&self, req: &QueryRequest) -> Result<QueryResult> {
        if req.k == 0 {
            return Err(Error::params("k must be >= 1"));
        }
        let (x, y) = self.meta.patch_coords(req.patch_id)?;
        let metric = req.metric.unwrap_or(req.method.default_metric());
        let start = Instant::now();
        let found = self.search(req, metric)?;
        let elapsed_s = start.elapsed().as_secs_f64();

        let neighbors = found
            .into_iter()
            .map(|n| {
                let (nx, ny) = self.meta.patch_coords(n.id)?;
                Ok(NeighborHit {
                    id: n.id,
                    x: nx,
                    y: ny,
                    distance: n.distance,
                })
            })
            .collect::<Result<_>>()?;
        Ok(QueryResult {
            query_id: req.patch_id,
            x,
            y,
            method: req.method,
            metric,
            k: req.k,
            exclude_self: req.exclude_self,
            neighbors,
            elapsed_s,
        })
    }

    fn search(&self, req: &QueryRequest, metric: Metric) -> Result<Vec<Neighbor>> {
        match req.method {
            SearchMethod::Brute => {
                brute_knn(&self.matrix, req.patch_id, req.k, metric, req.exclude_self)
            }
            SearchMethod::KdTree => {
                if metric != Metric::Euclidean {
                    return Err(Error::params(
                        "the kd-tree backend supports only the euclidean metric",
                    ));
                }
                let q = self.matrix.row(req.patch_id);
                if !req.exclude_self {
                    return self.tree.knn(q, req.k);
                }
                let mut found = self.tree.knn(q, req.k + 1)?;
                found.retain(|n| n.id != req.patch_id);
                found.truncate(req.k);
                Ok(found)
            }
        }
    }

    /// Query by image coordinate; clicks in the right/bottom margin clamp to the grid.
    pub fn query_at(
        &self,
        x: usize,
        y: usize,
        k: usize,
        method: SearchMethod,
    ) -> Result<QueryResult> {
        let id = self.meta.patch_id(x, y)?;
        self.query(&QueryRequest::new(id, k, method))
    }

    pub fn benchmark(
        &self,
        patch_id: usize,
        k: usize,
        options: BenchOptions,
    ) -> Result<BenchReport> {
        benchmark(&self.matrix, &self.tree, patch_id, k, options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn small_index() -> PatchIndex {
        let img = synth::textured_image(40, 48, 5);
        let grid = PatchGrid::new(img, 8).unwrap();
        PatchIndex::build(&grid, &FeatureParams::default()).unwrap()
    }

    #[test]
    fn self_first_and_sorted() {
        let index = small_index();
        let n = index.meta().n_patches();
        for method in [SearchMethod::Brute, SearchMethod::KdTree] {
            for id in [0, n / 3, n - 1] {
                let r = index.query(&QueryRequest::new(id, 5, method)).unwrap();
                assert_eq!(r.neighbors.len(), 5);
                assert_eq!(r.neighbors[0].distance, 0.0);
                assert!(r.neighbors.windows(2).all(|w| {
                    w[0].distance < w[1].distance
                        || (w[0].distance == w[1].distance && w[0].id < w[1].id)
                }));
                for hit in &r.neighbors {
                    assert_eq!(index.meta().patch_id(hit.x, hit.y).unwrap(), hit.id);
                }
            }
        }
    }

    #[test]
    fn brute_euclidean_equals_kdtree() {
        let index = small_index();
        for id in (0..index.meta().n_patches()).step_by(37) {
            let mut brute = QueryRequest::new(id, 7, SearchMethod::Brute);
            brute.metric = Some(Metric::Euclidean);
            let kd = QueryRequest::new(id, 7, SearchMethod::KdTree);
            let a = index.query(&brute).unwrap();
            let b = index.query(&kd).unwrap();
            assert_eq!(a.neighbors, b.neighbors);
        }
    }

    #[test]
    fn exclude_self_drops_query() {
        let index = small_index();
        for method in [SearchMethod::Brute, SearchMethod::KdTree] {
            let mut req = QueryRequest::new(10, 4, method);
            req.exclude_self = true;
            let r = index.query(&req).unwrap();
            assert_eq!(r.neighbors.len(), 4);
            assert!(r.neighbors.iter().all(|n| n.id != 10));
        }
    }

    #[test]
    fn kdtree_rejects_cosine() {
        let index = small_index();
        let mut req = QueryRequest::new(0, 3, SearchMethod::KdTree);
        req.metric = Some(Metric::Cosine);
        assert!(index.query(&req).is_err());
    }

    #[test]
    fn query_at_clamps_and_validates() {
        let index = small_index();
        let meta = index.meta();
        let r = index.query_at(39, 47, 1, SearchMethod::KdTree).unwrap();
        assert_eq!((r.x, r.y), (meta.grid_height() - 1, meta.grid_width() - 1));
        assert_eq!(
            r.rects(meta.patch_size),
            vec![Rect {
                x: r.x,
                y: r.y,
                size: 8
            }]
        );
        assert!(index.query_at(40, 0, 1, SearchMethod::KdTree).is_err());
        assert!(index.query_at(0, 0, 0, SearchMethod::KdTree).is_err());
    }

    #[test]
    fn method_strings() {
        assert_eq!(
            "brute".parse::<SearchMethod>().unwrap(),
            SearchMethod::Brute
        );
        assert_eq!(SearchMethod::KdTree.to_string(), "kdtree");
        assert!("lsh".parse::<SearchMethod>().is_err());
        assert_eq!(
            serde_json::to_string(&SearchMethod::KdTree).unwrap(),
            "\"kdtree\""
        );
    }
}

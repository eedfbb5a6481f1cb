use super::{Metric, Neighbor, Point};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Exact k nearest rows to row `query` by a full scan.
pub fn brute_knn(
    matrix: &FeatureMatrix,
    query: usize,
    k: usize,
    metric: Metric,
    exclude_self: bool,
) -> Result<Vec<Neighbor>> {
    let n = matrix.n_rows();
    if query >= n {
        return Err(Error::OutOfBounds {
            what: "query id",
            value: query.to_string(),
            range: format!("[0, {n})"),
        });
    }
    brute_knn_vector(
        matrix.rows(),
        matrix.row(query),
        k,
        metric,
        exclude_self.then_some(query),
    )
}

/// Exact k nearest of `rows` to an arbitrary point, optionally skipping one id.
pub fn brute_knn_vector(
    rows: &[Point],
    query: &Point,
    k: usize,
    metric: Metric,
    exclude: Option<usize>,
) -> Result<Vec<Neighbor>> {
    if k == 0 {
        return Err(Error::params("k must be >= 1"));
    }
    let mut all: Vec<Neighbor> = rows
        .iter()
        .enumerate()
        .filter(|&(id, _)| Some(id) != exclude)
        .map(|(id, row)| Neighbor {
            id,
            distance: metric.distance(query, row),
        })
        .collect();
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, Neighbor::order);
        all.truncate(k);
    }
    all.sort_unstable_by(Neighbor::order);
    Ok(all)
}

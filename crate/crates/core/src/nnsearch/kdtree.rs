//! kd-tree with max-variance split dimension and median split value.
//!
//! Points strictly below the split value go left, the rest (including the
//! median itself) go right. The median of an even-sized set is the lower of the
//! two middle values. If that would leave the left side empty (the median is
//! also the minimum), the split moves up to the next distinct value so both
//! children are non-empty.
//!
//! Search is exact branch-and-bound: a subtree is skipped only when its
//! distance lower bound is strictly greater than the current k-th best, so
//! results are identical to a brute-force scan, tie-breaks included.

use std::collections::BinaryHeap;

use super::{squared_euclidean, Candidate, Neighbor, Point};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, N_FEATURES};

pub const DEFAULT_LEAF_CAPACITY: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum KdNode {
    /// Range into the tree's permuted point order.
    Leaf { start: usize, end: usize },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<KdNode>,
    /// Point ids in leaf order.
    ids: Vec<usize>,
    /// Point coordinates in leaf order.
    points: Vec<Point>,
    leaf_capacity: usize,
}

impl KdTree {
    pub fn build(matrix: &FeatureMatrix) -> Result<Self> {
        Self::build_with_capacity(matrix, DEFAULT_LEAF_CAPACITY)
    }

    pub fn build_with_capacity(matrix: &FeatureMatrix, leaf_capacity: usize) -> Result<Self> {
        Self::from_points(matrix.rows(), leaf_capacity)
    }

    pub fn from_points(points: &[Point], leaf_capacity: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("kd-tree needs at least one point"));
        }
        if leaf_capacity == 0 {
            return Err(Error::params("leaf capacity must be >= 1"));
        }
        let mut builder = Builder {
            source: points,
            ids: (0..points.len()).collect(),
            nodes: Vec::with_capacity(2 * points.len() / leaf_capacity + 1),
            leaf_capacity,
        };
        builder.build(0, points.len());
        let ids = builder.ids;
        let nodes = builder.nodes;
        let points = ids.iter().map(|&i| points[i]).collect();
        Ok(KdTree {
            nodes,
            ids,
            points,
            leaf_capacity,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    /// Node 0 is the root.
    pub fn nodes(&self) -> &[KdNode] {
        &self.nodes
    }

    /// Point ids stored in a leaf node.
    pub fn leaf_ids(&self, node: usize) -> Option<&[usize]> {
        match self.nodes.get(node)? {
            KdNode::Leaf { start, end } => Some(&self.ids[*start..*end]),
            KdNode::Split { .. } => None,
        }
    }

    /// Ids from an in-order traversal of the leaves.
    pub fn ids_in_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            match &self.nodes[n] {
                KdNode::Leaf { start, end } => out.extend_from_slice(&self.ids[*start..*end]),
                KdNode::Split { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        out
    }

    /// Exact k nearest stored points to `query` by euclidean distance,
    /// ordered by `(distance, id)`.
    pub fn knn(&self, query: &Point, k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(Error::params("k must be >= 1"));
        }
        let k = k.min(self.len());
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, &mut heap);
        let mut out: Vec<Neighbor> = heap.into_iter().map(|c| c.0).collect();
        out.sort_unstable_by(Neighbor::order);
        Ok(out)
    }

    fn search(&self, node: usize, query: &Point, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            KdNode::Leaf { start, end } => {
                for slot in start..end {
                    let candidate = Neighbor {
                        id: self.ids[slot],
                        distance: squared_euclidean(query, &self.points[slot]).sqrt(),
                    };
                    if heap.len() < k {
                        heap.push(Candidate(candidate));
                    } else if candidate.order(&heap.peek().expect("k >= 1").0).is_lt() {
                        heap.pop();
                        heap.push(Candidate(candidate));
                    }
                }
            }
            KdNode::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = query[dim] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, query, k, heap);
                // Every point across the plane is at least this far away, and the
                // bound is computed with the same rounding as the real distances.
                let bound = (diff * diff).sqrt();
                let visit = heap.len() < k || bound <= heap.peek().expect("k >= 1").0.distance;
                if visit {
                    self.search(far, query, k, heap);
                }
            }
        }
    }
}

struct Builder<'a> {
    source: &'a [Point],
    ids: Vec<usize>,
    nodes: Vec<KdNode>,
    leaf_capacity: usize,
}

impl Builder<'_> {
    fn build(&mut self, start: usize, end: usize) -> usize {
        let index = self.nodes.len();
        self.nodes.push(KdNode::Leaf { start, end });
        if end - start <= self.leaf_capacity {
            return index;
        }
        let Some(dim) = self.max_variance_dim(start, end) else {
            // all points identical
            return index;
        };

        let source = self.source;
        self.ids[start..end]
            .sort_unstable_by(|&a, &b| source[a][dim].total_cmp(&source[b][dim]).then(a.cmp(&b)));
        let value_at = |ids: &[usize], slot: usize| source[ids[slot]][dim];
        let count = end - start;
        let mut value = value_at(&self.ids, start + (count - 1) / 2);
        let mut mid = self.ids[start..end].partition_point(|&i| source[i][dim] < value) + start;
        if mid == start {
            // median equals the minimum: move to the next distinct value
            let first_above =
                self.ids[start..end].partition_point(|&i| source[i][dim] <= value) + start;
            value = value_at(&self.ids, first_above);
            mid = first_above;
        }

        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[index] = KdNode::Split {
            dim,
            value,
            left,
            right,
        };
        index
    }

    /// Dimension of largest variance, or `None` when every dimension is constant.
    fn max_variance_dim(&self, start: usize, end: usize) -> Option<usize> {
        let ids = &self.ids[start..end];
        let n = ids.len() as f64;
        let mut best: Option<(usize, f64)> = None;
        for dim in 0..N_FEATURES {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut sum = 0.0;
            for &i in ids {
                let v = self.source[i][dim];
                lo = lo.min(v);
                hi = hi.max(v);
                sum += v;
            }
            if lo == hi {
                continue;
            }
            let mean = sum / n;
            let var = ids
                .iter()
                .map(|&i| {
                    let d = self.source[i][dim] - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            if best.is_none_or(|(_, b)| var > b) {
                best = Some((dim, var));
            }
        }
        best.map(|(dim, _)| dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnsearch::{brute_knn_vector, Metric};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, rng: &mut impl Rng) -> Vec<Point> {
        (0..n).map(|_| std::array::from_fn(|_| rng.gen())).collect()
    }

    fn check_invariants(tree: &KdTree, points: &[Point]) {
        let mut ids = tree.ids_in_order();
        ids.sort_unstable();
        assert_eq!(ids, (0..points.len()).collect::<Vec<_>>());
        assert!(tree.nodes().len() <= 2 * points.len());
        for (n, node) in tree.nodes().iter().enumerate() {
            if let Some(leaf) = tree.leaf_ids(n) {
                let identical = leaf.iter().all(|&i| points[i] == points[leaf[0]]);
                assert!(leaf.len() <= tree.leaf_capacity() || identical);
                assert!(!leaf.is_empty());
            }
            if let KdNode::Split {
                dim,
                value,
                left,
                right,
            } = *node
            {
                let below = collect(tree, left);
                let above = collect(tree, right);
                assert!(below.iter().all(|&i| points[i][dim] < value));
                assert!(above.iter().all(|&i| points[i][dim] >= value));
            }
        }
    }

    fn collect(tree: &KdTree, node: usize) -> Vec<usize> {
        match &tree.nodes()[node] {
            KdNode::Leaf { .. } => tree.leaf_ids(node).unwrap().to_vec(),
            KdNode::Split { left, right, .. } => {
                let mut v = collect(tree, *left);
                v.extend(collect(tree, *right));
                v
            }
        }
    }

    #[test]
    fn single_point_is_leaf() {
        let tree = KdTree::from_points(&[[0.5; 9]], 16).unwrap();
        assert_eq!(tree.nodes(), &[KdNode::Leaf { start: 0, end: 1 }]);
        let r = tree.knn(&[0.5; 9], 1).unwrap();
        assert_eq!(
            r,
            vec![Neighbor {
                id: 0,
                distance: 0.0
            }]
        );
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            KdTree::from_points(&[], 16),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn collinear_splits_on_varying_dim_at_median() {
        let mut pts = [[0.25; 9]; 3];
        pts[0][2] = 0.9;
        pts[1][2] = 0.1;
        pts[2][2] = 0.4;
        let tree = KdTree::from_points(&pts, 1).unwrap();
        match tree.nodes()[0] {
            KdNode::Split { dim, value, .. } => {
                assert_eq!(dim, 2);
                assert_eq!(value, 0.4);
            }
            _ => panic!("root should split"),
        }
        check_invariants(&tree, &pts);
    }

    #[test]
    fn max_variance_dimension_chosen() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Point> = (0..100)
            .map(|_| {
                let mut p: Point = std::array::from_fn(|_| rng.gen::<f64>() * 0.1);
                p[6] = rng.gen::<f64>();
                p
            })
            .collect();
        let tree = KdTree::from_points(&pts, 8).unwrap();
        let KdNode::Split { dim, value, .. } = tree.nodes()[0] else {
            panic!()
        };
        assert_eq!(dim, 6);
        let mut col: Vec<f64> = pts.iter().map(|p| p[6]).collect();
        col.sort_by(f64::total_cmp);
        assert_eq!(value, col[49]);
    }

    #[test]
    fn duplicates_become_one_leaf() {
        let pts = vec![[0.3; 9]; 40];
        let tree = KdTree::from_points(&pts, 4).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        let r = tree.knn(&[0.3; 9], 3).unwrap();
        assert_eq!(
            r.iter().map(|n| (n.id, n.distance)).collect::<Vec<_>>(),
            vec![(0, 0.0), (1, 0.0), (2, 0.0)]
        );
    }

    #[test]
    fn median_equal_to_minimum_still_splits() {
        let mut pts = vec![[0.0; 9]; 10];
        for p in pts.iter_mut().skip(6) {
            p[0] = 1.0;
        }
        let tree = KdTree::from_points(&pts, 2).unwrap();
        check_invariants(&tree, &pts);
        let KdNode::Split { value, .. } = tree.nodes()[0] else {
            panic!()
        };
        assert_eq!(value, 1.0);
    }

    #[test]
    fn matches_brute_force_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = random_points(1000, &mut rng);
        let tree = KdTree::from_points(&pts, DEFAULT_LEAF_CAPACITY).unwrap();
        check_invariants(&tree, &pts);
        for _ in 0..100 {
            let q: Point = std::array::from_fn(|_| rng.gen());
            let expected = brute_knn_vector(&pts, &q, 5, Metric::Euclidean, None).unwrap();
            assert_eq!(tree.knn(&q, 5).unwrap(), expected);
        }
    }

    #[test]
    fn quantized_data_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Point> = (0..500)
            .map(|_| std::array::from_fn(|_| rng.gen_range(0..3) as f64 / 2.0))
            .collect();
        let tree = KdTree::from_points(&pts, 4).unwrap();
        check_invariants(&tree, &pts);
        for (qi, q) in pts.iter().enumerate().step_by(25) {
            for k in [1, 5, 17] {
                let expected = brute_knn_vector(&pts, q, k, Metric::Euclidean, None).unwrap();
                assert_eq!(tree.knn(q, k).unwrap(), expected, "query {qi}, k {k}");
            }
        }
    }

    #[test]
    fn k_larger_than_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = random_points(7, &mut rng);
        let tree = KdTree::from_points(&pts, 2).unwrap();
        assert_eq!(tree.knn(&pts[0], 50).unwrap().len(), 7);
        assert!(tree.knn(&pts[0], 0).is_err());
    }
}

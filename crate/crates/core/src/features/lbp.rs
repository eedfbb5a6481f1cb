//! Local binary patterns over a circular neighborhood.
//!
//! Neighbor 0 sits due east of the center and the rest follow
//! counter-clockwise. Off-lattice sample points are rounded to the nearest
//! pixel. Bit `p` of the code is set when neighbor `p` is at least as bright
//! as the center.

use super::histogram::{hist_energy, hist_entropy, normalized_histogram};
use super::params::LbpParams;
use crate::error::{Error, Result};
use crate::grid::PatchView;

/// Packs the threshold bits of `neighbors` against `center`.
#[inline]
pub fn lbp_code(center: u8, neighbors: &[u8]) -> u32 {
    neighbors
        .iter()
        .enumerate()
        .fold(0u32, |code, (p, &g)| code | (((g >= center) as u32) << p))
}

/// `(row, col)` offsets of the sampled neighbors, in bit order.
pub fn neighbor_offsets(params: &LbpParams) -> Vec<(isize, isize)> {
    let r = params.radius as f64;
    (0..params.points)
        .map(|p| {
            let angle = std::f64::consts::TAU * p as f64 / params.points as f64;
            // rows grow downward, so "north" is a negative row offset
            let dr = (-r * angle.sin()).round() as isize;
            let dc = (r * angle.cos()).round() as isize;
            (dr, dc)
        })
        .collect()
}

/// Codes for interior pixels of a patch, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbpMap {
    pub rows: usize,
    pub cols: usize,
    pub codes: Vec<u32>,
}

pub fn lbp_map(patch: &PatchView<'_>, params: &LbpParams) -> Result<LbpMap> {
    params.validate()?;
    lbp_map_with(patch, params, &neighbor_offsets(params))
}

pub(crate) fn lbp_map_with(
    patch: &PatchView<'_>,
    params: &LbpParams,
    offsets: &[(isize, isize)],
) -> Result<LbpMap> {
    let r = params.radius as usize;
    let size = patch.size();
    if size < 2 * r + 1 {
        return Err(Error::params(format!(
            "patch of size {size} is too small for LBP radius {r}"
        )));
    }
    let inner = size - 2 * r;
    let mut codes = Vec::with_capacity(inner * inner);
    let mut neighbors = vec![0u8; offsets.len()];
    for i in r..size - r {
        for j in r..size - r {
            for (slot, &(dr, dc)) in neighbors.iter_mut().zip(offsets) {
                *slot = patch.get((i as isize + dr) as usize, (j as isize + dc) as usize);
            }
            codes.push(lbp_code(patch.get(i, j), &neighbors));
        }
    }
    Ok(LbpMap {
        rows: inner,
        cols: inner,
        codes,
    })
}

/// (energy, entropy) of the code histogram.
pub fn lbp_features(patch: &PatchView<'_>, params: &LbpParams) -> Result<(f64, f64)> {
    params.validate()?;
    lbp_features_with(patch, params, &neighbor_offsets(params))
}

pub(crate) fn lbp_features_with(
    patch: &PatchView<'_>,
    params: &LbpParams,
    offsets: &[(isize, isize)],
) -> Result<(f64, f64)> {
    let map = lbp_map_with(patch, params, offsets)?;
    let h = normalized_histogram(
        map.codes.iter().map(|&c| c as f64),
        params.bins,
        0.0,
        params.code_range(),
    )?;
    Ok((hist_energy(&h), hist_entropy(&h)))
}

//! Dense stride-1 patch grid and the patch-id <-> top-left bijection.
//!
//! Patch ids are row-major over the grid of valid top-left positions, so for a
//! grid of width `GW = N - p + 1` the id of top-left `(x, y)` is `x * GW + y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Image dimensions plus patch size; everything else about the grid derives from these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMeta {
    /// Image height (rows).
    pub height: usize,
    /// Image width (columns).
    pub width: usize,
    pub patch_size: usize,
}

impl GridMeta {
    pub fn new(height: usize, width: usize, patch_size: usize) -> Result<Self> {
        let max = height.min(width);
        if patch_size < 2 || patch_size > max {
            return Err(Error::InvalidPatchSize {
                size: patch_size,
                max,
            });
        }
        Ok(GridMeta {
            height,
            width,
            patch_size,
        })
    }

    pub fn grid_height(&self) -> usize {
        self.height - self.patch_size + 1
    }

    pub fn grid_width(&self) -> usize {
        self.width - self.patch_size + 1
    }

    pub fn n_patches(&self) -> usize {
        self.grid_height() * self.grid_width()
    }

    /// Maps an image coordinate to the nearest valid top-left. Coordinates in
    /// the bottom/right margin clamp onto the last grid row/column.
    pub fn clamp_to_grid(&self, x: usize, y: usize) -> Result<(usize, usize)> {
        if x >= self.height || y >= self.width {
            return Err(Error::OutOfBounds {
                what: "coordinate",
                value: format!("x={x}, y={y}"),
                range: format!(
                    "x < {}, y < {} (top-left grid x < {}, y < {})",
                    self.height,
                    self.width,
                    self.grid_height(),
                    self.grid_width()
                ),
            });
        }
        Ok((x.min(self.grid_height() - 1), y.min(self.grid_width() - 1)))
    }

    /// Id of the patch whose top-left is (x, y), after clamping into the grid.
    pub fn patch_id(&self, x: usize, y: usize) -> Result<usize> {
        let (x, y) = self.clamp_to_grid(x, y)?;
        Ok(x * self.grid_width() + y)
    }

    pub fn patch_coords(&self, id: usize) -> Result<(usize, usize)> {
        let n = self.n_patches();
        if id >= n {
            return Err(Error::OutOfBounds {
                what: "patch id",
                value: id.to_string(),
                range: format!("[0, {n})"),
            });
        }
        let gw = self.grid_width();
        Ok((id / gw, id % gw))
    }
}

/// All overlapping `p x p` windows of an image.
#[derive(Debug, Clone)]
pub struct PatchGrid {
    image: GrayImage,
    meta: GridMeta,
}

impl PatchGrid {
    pub fn new(image: GrayImage, patch_size: usize) -> Result<Self> {
        let meta = GridMeta::new(image.height(), image.width(), patch_size)?;
        Ok(PatchGrid { image, meta })
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }

    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn patch_size(&self) -> usize {
        self.meta.patch_size
    }

    pub fn len(&self) -> usize {
        self.meta.n_patches()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn patch_id(&self, x: usize, y: usize) -> Result<usize> {
        self.meta.patch_id(x, y)
    }

    pub fn patch_coords(&self, id: usize) -> Result<(usize, usize)> {
        self.meta.patch_coords(id)
    }

    pub fn view(&self, id: usize) -> Result<PatchView<'_>> {
        let (x, y) = self.patch_coords(id)?;
        Ok(PatchView {
            image: &self.image,
            id,
            x,
            y,
            size: self.meta.patch_size,
        })
    }

    /// Views in patch-id order.
    pub fn views(&self) -> impl ExactSizeIterator<Item = PatchView<'_>> + '_ {
        (0..self.len()).map(move |id| self.view(id).expect("id < len"))
    }
}

/// A borrowed square window of a [`GrayImage`].
#[derive(Debug, Clone, Copy)]
pub struct PatchView<'a> {
    image: &'a GrayImage,
    pub id: usize,
    pub x: usize,
    pub y: usize,
    size: usize,
}

impl<'a> PatchView<'a> {
    /// Treats a whole square image as a single patch with id 0.
    pub fn full(image: &'a GrayImage) -> Result<Self> {
        if image.height() != image.width() {
            return Err(Error::params(format!(
                "patch must be square, got {}x{}",
                image.height(),
                image.width()
            )));
        }
        Ok(PatchView {
            image,
            id: 0,
            x: 0,
            y: 0,
            size: image.height(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        debug_assert!(i < self.size && j < self.size);
        self.image.get(self.x + i, self.y + j)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [u8] {
        let start = (self.x + i) * self.image.width() + self.y;
        &self.image.as_bytes()[start..start + self.size]
    }

    /// Copies the window out, row-major.
    pub fn to_vec(&self) -> Vec<u8> {
        (0..self.size)
            .flat_map(|i| self.row(i).iter().copied())
            .collect()
    }
}

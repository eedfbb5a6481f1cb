//! Grayscale rasters, decoding and rectangle overlays.
//!
//! Coordinates follow matrix convention throughout the crate: `x` is the row
//! (0 at the top) and `y` is the column (0 at the left).

use std::io::Cursor;
use std::path::Path;

use image::ImageFormat;
pub use image::{DynamicImage, Rgb, RgbImage};

use crate::error::{Error, Result};

/// Overlay color for annotated rectangles.
pub const OUTLINE_COLOR: Rgb<u8> = Rgb([255, 0, 0]);

/// Row-major 8-bit luminance raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Decode(format!("zero-area image ({height}x{width})")));
        }
        if data.len() != height * width {
            return Err(Error::params(format!(
                "pixel buffer has {} values, expected {}",
                data.len(),
                height * width
            )));
        }
        Ok(GrayImage {
            height,
            width,
            data,
        })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    /// Gray-to-RGB copy with R = G = B.
    pub fn to_rgb(&self) -> RgbImage {
        RgbImage::from_fn(self.width as u32, self.height as u32, |c, r| {
            let v = self.get(r as usize, c as usize);
            Rgb([v, v, v])
        })
    }

    pub fn to_luma_image(&self) -> image::GrayImage {
        image::GrayImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
            .expect("buffer length matches dimensions")
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        encode_png(&DynamicImage::ImageLuma8(self.to_luma_image()))
    }
}

/// BT.601 luma with round-half-up, computed in integers so it is exact.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000).min(255) as u8
}

/// Decodes PNG or binary PGM bytes.
pub fn decode(bytes: &[u8]) -> Result<DynamicImage> {
    if bytes.is_empty() {
        return Err(Error::Decode("empty input".into()));
    }
    let img = image::load_from_memory(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::Decode("zero-area image".into()));
    }
    Ok(img)
}

pub fn open(path: impl AsRef<Path>) -> Result<DynamicImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Converts a decoded raster to luminance. Single-channel inputs pass through.
pub fn to_grayscale(img: &DynamicImage) -> Result<GrayImage> {
    let (width, height) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(gray) => gray.as_raw().clone(),
        DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_) => img.to_luma8().into_raw(),
        _ => img
            .to_rgb8()
            .pixels()
            .map(|p| luma(p[0], p[1], p[2]))
            .collect(),
    };
    GrayImage::new(height, width, data)
}

pub fn encode_png(img: &DynamicImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Decode(format!("PNG encoding failed: {e}")))?;
    Ok(out.into_inner())
}

/// Writes an RGB raster as PNG.
pub fn save_png(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(&DynamicImage::ImageRgb8(img.clone()))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Square window outline, anchored at its top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

/// Returns a copy of `base` with a 1-pixel outline drawn for each rectangle.
/// Outline pixels falling outside the raster are skipped.
pub fn annotate(base: &RgbImage, rects: &[Rect], color: Rgb<u8>) -> RgbImage {
    let mut out = base.clone();
    let (w, h) = (out.width() as usize, out.height() as usize);
    let mut put = |row: usize, col: usize| {
        if row < h && col < w {
            out.put_pixel(col as u32, row as u32, color);
        }
    };
    for rect in rects.iter().filter(|r| r.size > 0) {
        let last_row = rect.x + rect.size - 1;
        let last_col = rect.y + rect.size - 1;
        for col in rect.y..=last_col {
            put(rect.x, col);
            put(last_row, col);
        }
        for row in rect.x..=last_row {
            put(row, rect.y);
            put(row, last_col);
        }
    }
    out
}

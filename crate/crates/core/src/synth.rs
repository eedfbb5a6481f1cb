//! Deterministic synthetic test images with several distinct textures.

use crate::image::GrayImage;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform noise in `[0, 1)` keyed by position and seed.
fn noise(row: usize, col: usize, seed: u64) -> f64 {
    let h = splitmix(seed ^ splitmix(((row as u64) << 32) | col as u64));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// A `height x width` image tiled into regions of gratings at different
/// orientations and frequencies, a checkerboard, a smooth gradient and noise.
pub fn textured_image(height: usize, width: usize, seed: u64) -> GrayImage {
    let region_h = (height / 3).max(1);
    let region_w = (width / 4).max(1);
    GrayImage::from_fn(height, width, |r, c| {
        let region = ((r / region_h).min(2) * 4 + (c / region_w).min(3)) as u64;
        let (rf, cf) = (r as f64, c as f64);
        let jitter = noise(r, c, seed);
        let v = match (region + seed) % 7 {
            0 => 128.0 + 90.0 * (cf * 0.8).sin(),
            1 => 128.0 + 90.0 * (rf * 0.35).sin(),
            2 => 128.0 + 80.0 * ((rf + cf) * 0.5).sin() * (cf * 0.11).cos(),
            3 => {
                if ((r / 4) + (c / 4)) % 2 == 0 {
                    60.0
                } else {
                    190.0
                }
            }
            4 => 40.0 + 170.0 * (rf / height as f64) * (cf / width as f64).sqrt(),
            5 => 255.0 * jitter,
            _ => 100.0 + 60.0 * ((rf * 0.2).sin() + (cf * 0.27).cos()),
        };
        (v + 12.0 * (jitter - 0.5)).round().clamp(0.0, 255.0) as u8
    })
    .expect("non-empty dimensions")
}

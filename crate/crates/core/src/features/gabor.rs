//! Complex Gabor filtering and magnitude-histogram statistics.
//!
//! Kernel coordinates: `x` is the horizontal offset (positive to the right)
//! and `y` the vertical offset (positive downward), both relative to the
//! kernel center. The rotated frame is `x' = x cos t + y sin t`,
//! `y' = -x sin t + y cos t`.
//!
//! When the kernel factors as `h(x) * v(y)` (axis-aligned orientation, or an
//! isotropic envelope) the convolution runs as two 1-D passes. Otherwise it
//! falls back to a direct 2-D sum.

use num_complex::Complex64;

use super::histogram::{bin_index, hist_energy, hist_entropy, probabilities};
use super::params::{GaborParams, Padding};
use crate::error::Result;
use crate::grid::PatchView;

const AXIS_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GaborKernel {
    half: usize,
    /// Row-major `side x side`, row index `y + half`, column index `x + half`.
    values: Vec<Complex64>,
    separable: Option<(Vec<Complex64>, Vec<Complex64>)>,
}

pub fn gabor_kernel(params: &GaborParams) -> Result<GaborKernel> {
    GaborKernel::new(params)
}

impl GaborKernel {
    pub fn new(params: &GaborParams) -> Result<Self> {
        params.validate()?;
        let half = params.half_extent();
        let side = 2 * half + 1;
        let (sin_t, cos_t) = params.theta.sin_cos();
        let two_sigma2 = 2.0 * params.sigma * params.sigma;
        let gamma2 = params.gamma * params.gamma;
        let freq = std::f64::consts::TAU / params.wavelength;

        let mut values = Vec::with_capacity(side * side);
        for row in 0..side {
            let y = row as f64 - half as f64;
            for col in 0..side {
                let x = col as f64 - half as f64;
                let xr = x * cos_t + y * sin_t;
                let yr = -x * sin_t + y * cos_t;
                let envelope = (-(xr * xr + gamma2 * yr * yr) / two_sigma2).exp();
                values.push(Complex64::from_polar(envelope, freq * xr + params.psi));
            }
        }

        let offsets = || (0..side).map(|k| k as f64 - half as f64);
        let gauss = |t: f64, scale2: f64| (-(scale2 * t * t) / two_sigma2).exp();
        let separable = if sin_t.abs() < AXIS_EPS {
            let c = cos_t.signum();
            Some((
                offsets()
                    .map(|x| Complex64::from_polar(gauss(x, 1.0), freq * c * x + params.psi))
                    .collect(),
                offsets()
                    .map(|y| Complex64::new(gauss(y, gamma2), 0.0))
                    .collect(),
            ))
        } else if cos_t.abs() < AXIS_EPS {
            let s = sin_t.signum();
            Some((
                offsets()
                    .map(|x| Complex64::new(gauss(x, gamma2), 0.0))
                    .collect(),
                offsets()
                    .map(|y| Complex64::from_polar(gauss(y, 1.0), freq * s * y + params.psi))
                    .collect(),
            ))
        } else if params.gamma == 1.0 {
            Some((
                offsets()
                    .map(|x| Complex64::from_polar(gauss(x, 1.0), freq * cos_t * x))
                    .collect(),
                offsets()
                    .map(|y| Complex64::from_polar(gauss(y, 1.0), freq * sin_t * y + params.psi))
                    .collect(),
            ))
        } else {
            None
        };

        Ok(GaborKernel {
            half,
            values,
            separable,
        })
    }

    pub fn half_extent(&self) -> usize {
        self.half
    }

    pub fn side(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_separable(&self) -> bool {
        self.separable.is_some()
    }

    /// Kernel value at offset `(x, y)` from the center.
    pub fn at(&self, x: isize, y: isize) -> Complex64 {
        let h = self.half as isize;
        assert!(
            x.abs() <= h && y.abs() <= h,
            "offset ({x}, {y}) outside kernel"
        );
        self.values[((y + h) as usize) * self.side() + (x + h) as usize]
    }

    /// Per-pixel response magnitude of `patch` convolved with the kernel,
    /// row-major, same size as the patch.
    pub fn magnitude_response(&self, patch: &PatchView<'_>, padding: Padding) -> Vec<f64> {
        let pixels: Vec<f64> = patch.to_vec().into_iter().map(f64::from).collect();
        let size = patch.size();
        let response = match &self.separable {
            Some((h, v)) => self.convolve_separable(&pixels, size, padding, h, v),
            None => self.convolve_direct(&pixels, size, padding),
        };
        response
            .iter()
            .map(|z| (z.re * z.re + z.im * z.im).sqrt())
            .collect()
    }

    /// For each output position along one axis, the `(kernel index, pixel index)` taps.
    fn taps(&self, size: usize, padding: Padding) -> Vec<Vec<(usize, usize)>> {
        let h = self.half as isize;
        (0..size as isize)
            .map(|out| {
                (0..self.side())
                    .filter_map(|k| {
                        let src = out - (k as isize - h);
                        match padding {
                            Padding::Replicate => {
                                Some((k, src.clamp(0, size as isize - 1) as usize))
                            }
                            Padding::Zero => (0..size as isize)
                                .contains(&src)
                                .then_some((k, src as usize)),
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn convolve_direct(&self, pixels: &[f64], size: usize, padding: Padding) -> Vec<Complex64> {
        let taps = self.taps(size, padding);
        let side = self.side();
        let mut out = Vec::with_capacity(size * size);
        for row_taps in &taps {
            for col_taps in &taps {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(ky, pr) in row_taps {
                    let krow = &self.values[ky * side..(ky + 1) * side];
                    let prow = &pixels[pr * size..(pr + 1) * size];
                    for &(kx, pc) in col_taps {
                        acc += krow[kx] * prow[pc];
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    fn convolve_separable(
        &self,
        pixels: &[f64],
        size: usize,
        padding: Padding,
        h: &[Complex64],
        v: &[Complex64],
    ) -> Vec<Complex64> {
        let taps = self.taps(size, padding);
        let mut horizontal = Vec::with_capacity(size * size);
        for r in 0..size {
            let prow = &pixels[r * size..(r + 1) * size];
            for col_taps in &taps {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(kx, pc) in col_taps {
                    acc += h[kx] * prow[pc];
                }
                horizontal.push(acc);
            }
        }
        let mut out = Vec::with_capacity(size * size);
        for row_taps in &taps {
            for c in 0..size {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(ky, pr) in row_taps {
                    acc += v[ky] * horizontal[pr * size + c];
                }
                out.push(acc);
            }
        }
        out
    }
}

/// (energy, entropy) of the response-magnitude histogram over `[0, max]`.
/// An all-zero response counts as a one-hot histogram.
pub fn gabor_features(patch: &PatchView<'_>, params: &GaborParams) -> Result<(f64, f64)> {
    let kernel = GaborKernel::new(params)?;
    Ok(gabor_features_with(patch, params, &kernel))
}

pub(crate) fn gabor_features_with(
    patch: &PatchView<'_>,
    params: &GaborParams,
    kernel: &GaborKernel,
) -> (f64, f64) {
    let magnitudes = kernel.magnitude_response(patch, params.padding);
    let max = magnitudes.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return (1.0, 0.0);
    }
    let mut counts = vec![0u64; params.bins];
    let scale = params.bins as f64 / max;
    for &m in &magnitudes {
        counts[bin_index(m, 0.0, scale, params.bins)] += 1;
    }
    let h = probabilities(&counts, magnitudes.len() as u64);
    (hist_energy(&h), hist_entropy(&h))
}

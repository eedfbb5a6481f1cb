use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbpParams {
    /// Number of circular neighbors.
    pub points: u32,
    /// Sampling radius in pixels.
    pub radius: u32,
    /// Histogram bins over the code range `[0, 2^points)`.
    pub bins: usize,
}

impl Default for LbpParams {
    fn default() -> Self {
        LbpParams {
            points: 8,
            radius: 1,
            bins: 8,
        }
    }
}

impl LbpParams {
    pub const MAX_POINTS: u32 = 31;

    pub fn validate(&self) -> Result<()> {
        if !(4..=Self::MAX_POINTS).contains(&self.points) {
            return Err(Error::params(format!(
                "lbp_points must be in [4, {}], got {}",
                Self::MAX_POINTS,
                self.points
            )));
        }
        if self.radius < 1 {
            return Err(Error::params("lbp_radius must be >= 1"));
        }
        if self.bins < 2 || (self.bins as u64) > (1u64 << self.points) {
            return Err(Error::params(format!(
                "lbp_bins must be in [2, 2^{}], got {}",
                self.points, self.bins
            )));
        }
        Ok(())
    }

    /// Exclusive upper bound of the code range.
    pub fn code_range(&self) -> f64 {
        (1u64 << self.points) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlcmParams {
    /// Pixel displacement `(rows, cols)` from reference to neighbor.
    pub offset: (i32, i32),
    /// Number of gray levels after quantization.
    pub levels: usize,
    pub symmetric: bool,
    pub normalize: bool,
}

impl Default for GlcmParams {
    fn default() -> Self {
        GlcmParams {
            offset: (0, 1),
            levels: 256,
            symmetric: false,
            normalize: true,
        }
    }
}

impl GlcmParams {
    pub fn validate(&self) -> Result<()> {
        if self.offset == (0, 0) {
            return Err(Error::params("glcm_offset must not be (0, 0)"));
        }
        if !(2..=256).contains(&self.levels) {
            return Err(Error::params(format!(
                "glcm_levels must be in [2, 256], got {}",
                self.levels
            )));
        }
        Ok(())
    }
}

/// How the Gabor convolution reads pixels outside the patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// Nearest edge pixel.
    #[default]
    Replicate,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborParams {
    pub wavelength: f64,
    pub theta: f64,
    pub psi: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// Kernel half-extent; `None` means `ceil(3 * sigma)`.
    pub half_extent: Option<usize>,
    pub bins: usize,
    pub padding: Padding,
}

impl Default for GaborParams {
    fn default() -> Self {
        GaborParams {
            wavelength: 8.0,
            theta: 0.0,
            psi: 0.0,
            sigma: 4.0,
            gamma: 0.5,
            half_extent: None,
            bins: 8,
            padding: Padding::Replicate,
        }
    }
}

impl GaborParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::params(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            }
        };
        positive("gabor_lambda", self.wavelength)?;
        positive("gabor_sigma", self.sigma)?;
        positive("gabor_gamma", self.gamma)?;
        if !self.theta.is_finite() || !self.psi.is_finite() {
            return Err(Error::params("gabor_theta and gabor_psi must be finite"));
        }
        if self.bins < 2 {
            return Err(Error::params("gabor_bins must be >= 2"));
        }
        if self.half_extent() > 256 {
            return Err(Error::params("gabor kernel half-extent must be <= 256"));
        }
        Ok(())
    }

    pub fn half_extent(&self) -> usize {
        self.half_extent
            .unwrap_or_else(|| (3.0 * self.sigma).ceil() as usize)
    }
}

/// Parameters for all three extractors.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureParams {
    pub lbp: LbpParams,
    pub glcm: GlcmParams,
    pub gabor: GaborParams,
}

impl FeatureParams {
    pub fn validate(&self) -> Result<()> {
        self.lbp.validate()?;
        self.glcm.validate()?;
        self.gabor.validate()
    }

    /// Smallest patch every extractor can handle.
    pub fn min_patch_size(&self) -> usize {
        let lbp = 2 * self.lbp.radius as usize + 1;
        let glcm = self
            .glcm
            .offset
            .0
            .unsigned_abs()
            .max(self.glcm.offset.1.unsigned_abs()) as usize
            + 1;
        lbp.max(glcm).max(2)
    }

    /// Applies one `key = value` setting. Keys match the CLI flag names with
    /// underscores (`lbp_points`, `glcm_offset`, `gabor_lambda`, ...).
    pub fn apply_setting(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "lbp_points" => self.lbp.points = parse(key, value)?,
            "lbp_radius" => self.lbp.radius = parse(key, value)?,
            "lbp_bins" => self.lbp.bins = parse(key, value)?,
            "glcm_offset" => self.glcm.offset = parse_offset(value)?,
            "glcm_levels" => self.glcm.levels = parse(key, value)?,
            "glcm_symmetric" => self.glcm.symmetric = parse(key, value)?,
            "glcm_normalize" => self.glcm.normalize = parse(key, value)?,
            "gabor_lambda" => self.gabor.wavelength = parse(key, value)?,
            "gabor_theta" => self.gabor.theta = parse(key, value)?,
            "gabor_psi" => self.gabor.psi = parse(key, value)?,
            "gabor_sigma" => self.gabor.sigma = parse(key, value)?,
            "gabor_gamma" => self.gabor.gamma = parse(key, value)?,
            "gabor_half_extent" => self.gabor.half_extent = Some(parse(key, value)?),
            "gabor_bins" => self.gabor.bins = parse(key, value)?,
            "gabor_padding" => {
                self.gabor.padding = match value {
                    "replicate" => Padding::Replicate,
                    "zero" => Padding::Zero,
                    other => {
                        return Err(Error::params(format!(
                            "gabor_padding must be 'replicate' or 'zero', got '{other}'"
                        )))
                    }
                }
            }
            other => return Err(Error::params(format!("unknown feature setting '{other}'"))),
        }
        Ok(())
    }

    pub const SETTING_KEYS: &'static [&'static str] = &[
        "lbp_points",
        "lbp_radius",
        "lbp_bins",
        "glcm_offset",
        "glcm_levels",
        "glcm_symmetric",
        "glcm_normalize",
        "gabor_lambda",
        "gabor_theta",
        "gabor_psi",
        "gabor_sigma",
        "gabor_gamma",
        "gabor_half_extent",
        "gabor_bins",
        "gabor_padding",
    ];
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::params(format!("{key}: cannot parse '{value}': {e}")))
}

/// Parses `"da,db"` (whitespace and surrounding parentheses allowed).
pub fn parse_offset(value: &str) -> Result<(i32, i32)> {
    let inner = value.trim().trim_start_matches('(').trim_end_matches(')');
    let mut parts = inner.split(',').map(str::trim);
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => Ok((parse("glcm_offset", a)?, parse("glcm_offset", b)?)),
        _ => Err(Error::params(format!(
            "glcm_offset must look like 'rows,cols', got '{value}'"
        ))),
    }
}

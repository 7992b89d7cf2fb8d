//! Rasters shared by every stage of the pipeline.
//!
//! All rasters are row-major. [`Image`] stores interleaved RGB triples with
//! values normalized to `[0, 1]` (sRGB bytes divided by 255, no linearization).

use crate::error::{Error, Result};

/// An RGB raster with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub const CHANNELS: usize = 3;

    /// Builds an image from interleaved RGB data, validating length and range.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height * 3 {
            return Err(Error::InvalidRaster(format!(
                "expected {} values for {width}x{height} RGB, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::InvalidRaster(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image by clamping every value into `[0, 1]`. NaN maps to 0.
    pub(crate) fn from_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * 3);
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Self { width, height, data }
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(3)
    }

    /// Unweighted channel mean `(R + G + B) / 3` per pixel.
    pub fn luminance(&self) -> Vec<f64> {
        self.pixels().map(luminance).collect()
    }

    pub fn mean_luminance(&self) -> f64 {
        self.pixels().map(luminance).sum::<f64>() / self.pixel_count() as f64
    }
}

#[inline]
pub fn luminance(rgb: &[f64]) -> f64 {
    (rgb[0] + rgb[1] + rgb[2]) / 3.0
}

#[inline]
pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Disparity-like depth in `[0, 1]`: 1 is nearest, 0 is farthest (sky).
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "expected {} depth values for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::InvalidRaster(format!("depth value {v} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    /// Min-max normalizes arbitrary finite values into `[0, 1]`.
    ///
    /// A constant input maps to all zeros.
    pub fn from_raw(width: usize, height: usize, raw: &[f64]) -> Result<Self> {
        if let Some(v) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidRaster(format!("non-finite depth value {v}")));
        }
        let (min, max) = raw
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = max - min;
        let data = if span > 0.0 {
            raw.iter().map(|&v| ((v - min) / span).clamp(0.0, 1.0)).collect()
        } else {
            vec![0.0; raw.len()]
        };
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }
}

/// Per-pixel sky flags (`true` = sky).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkyMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl SkyMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "expected {} mask values for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![false; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn is_sky(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn sky_count(&self) -> usize {
        self.data.iter().filter(|&&s| s).count()
    }

    pub fn sky_fraction(&self) -> f64 {
        self.sky_count() as f64 / self.data.len() as f64
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&s| s)
    }

    pub fn is_full(&self) -> bool {
        self.data.iter().all(|&s| s)
    }
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

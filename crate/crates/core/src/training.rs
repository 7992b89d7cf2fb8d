//! Brightness labels, brightness-weighted skip fusion and the loss terms,
//! as plain array arithmetic.

use crate::error::{Error, Result};
use crate::raster::{ensure_same_dims, luminance, Image};

/// Channel-major feature tensor of shape `channels x height x width`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidArgument("feature map dimensions must be positive".into()));
        }
        if data.len() != channels * height * width {
            return Err(Error::InvalidRaster(format!(
                "expected {} feature values, got {}",
                channels * height * width,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRaster("feature map contains non-finite values".into()));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Low-resolution map of mean luminance, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrightnessMap {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl BrightnessMap {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidArgument("brightness map dimensions must be positive".into()));
        }
        if data.len() != height * width {
            return Err(Error::InvalidRaster(format!(
                "expected {} brightness values, got {}",
                height * width,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::InvalidRaster(format!("brightness value {v} outside [0, 1]")));
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Nearest-neighbor resample to `height x width`.
    pub fn resample_nearest(&self, height: usize, width: usize) -> BrightnessMap {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            let sr = r * self.height / height;
            for c in 0..width {
                data.push(self.get(sr, c * self.width / width));
            }
        }
        BrightnessMap { height, width, data }
    }
}

/// Mean luminance over a uniform `grid = (rows, cols)` partition. Cell
/// sizes are `floor(height / rows)` by `floor(width / cols)`; leftover
/// pixels join the last cell along each axis.
pub fn brightness_label(img: &Image, grid: (usize, usize)) -> Result<BrightnessMap> {
    let (gh, gw) = grid;
    if gh == 0 || gw == 0 {
        return Err(Error::InvalidArgument("brightness grid dimensions must be positive".into()));
    }
    if gh > img.height() || gw > img.width() {
        return Err(Error::InvalidArgument(format!(
            "grid {gh}x{gw} exceeds image {}x{}",
            img.height(),
            img.width()
        )));
    }
    let (cell_h, cell_w) = (img.height() / gh, img.width() / gw);
    let mut sums = vec![0.0; gh * gw];
    let mut counts = vec![0usize; gh * gw];
    for row in 0..img.height() {
        let gr = (row / cell_h).min(gh - 1);
        for col in 0..img.width() {
            let gc = (col / cell_w).min(gw - 1);
            sums[gr * gw + gc] += luminance(&img.pixel(row, col));
            counts[gr * gw + gc] += 1;
        }
    }
    let data = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| (s / n as f64).clamp(0.0, 1.0))
        .collect();
    BrightnessMap::new(gh, gw, data)
}

/// Skip-connection fusion at decoder level `level` (1 to 4).
///
/// Level 1 weights the transferred encoder features by `1 + M̂`, with `M̂`
/// resampled to the feature grid and broadcast over channels:
/// `gamma_feat * (1 + M̂) + dec_feat`. Deeper levels add the two maps.
pub fn skip_fuse(
    gamma_feat: &FeatureMap,
    dec_feat: &FeatureMap,
    brightness: Option<&BrightnessMap>,
    level: u8,
) -> Result<FeatureMap> {
    if gamma_feat.shape() != dec_feat.shape() {
        return Err(Error::InvalidArgument(format!(
            "feature shapes differ: {:?} vs {:?}",
            gamma_feat.shape(),
            dec_feat.shape()
        )));
    }
    let (_, height, width) = gamma_feat.shape();
    let data = match level {
        1 => {
            let m = brightness.ok_or_else(|| {
                Error::InvalidArgument("level 1 fusion requires a brightness map".into())
            })?;
            let m = if (m.height, m.width) == (height, width) {
                m.clone()
            } else {
                m.resample_nearest(height, width)
            };
            let plane = height * width;
            gamma_feat
                .data
                .iter()
                .zip(&dec_feat.data)
                .enumerate()
                .map(|(i, (&g, &d))| g * (1.0 + m.data[i % plane]) + d)
                .collect()
        }
        2..=4 => gamma_feat.data.iter().zip(&dec_feat.data).map(|(&g, &d)| g + d).collect(),
        other => return Err(Error::InvalidArgument(format!("fusion level must be 1-4, got {other}"))),
    };
    Ok(FeatureMap { data, ..gamma_feat.clone() })
}

/// How per-element loss terms are reduced over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Sum over examples and elements.
    #[default]
    Sum,
    /// Sum divided by the total element count.
    Mean,
}

fn reduce(total: f64, elements: usize, reduction: Reduction) -> f64 {
    match reduction {
        Reduction::Sum => total,
        Reduction::Mean if elements > 0 => total / elements as f64,
        Reduction::Mean => 0.0,
    }
}

/// Squared-error loss between predicted and reference brightness maps.
pub fn loss_brightness(pred: &[BrightnessMap], label: &[BrightnessMap], reduction: Reduction) -> Result<f64> {
    if pred.len() != label.len() {
        return Err(Error::InvalidArgument(format!(
            "batch sizes differ: {} vs {}",
            pred.len(),
            label.len()
        )));
    }
    let mut total = 0.0;
    let mut elements = 0;
    for (p, l) in pred.iter().zip(label) {
        ensure_same_dims((p.width, p.height), (l.width, l.height))?;
        total += p.data.iter().zip(&l.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        elements += p.data.len();
    }
    Ok(reduce(total, elements, reduction))
}

/// L1 loss between predicted and reference images.
pub fn loss_pixel(pred: &[Image], target: &[Image], reduction: Reduction) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::InvalidArgument(format!(
            "batch sizes differ: {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    let mut total = 0.0;
    let mut elements = 0;
    for (p, t) in pred.iter().zip(target) {
        ensure_same_dims(p.dims(), t.dims())?;
        total += p.data().iter().zip(t.data()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        elements += p.data().len();
    }
    Ok(reduce(total, elements, reduction))
}

pub const SCORE_EPSILON: f64 = 1e-7;

/// `mean(log real) + mean(log(1 - fake))` over discriminator probabilities,
/// each clamped to `[1e-7, 1 - 1e-7]`.
pub fn loss_adversarial(real_scores: &[f64], fake_scores: &[f64]) -> Result<f64> {
    if real_scores.is_empty() || fake_scores.is_empty() {
        return Err(Error::InvalidArgument("adversarial loss needs non-empty score lists".into()));
    }
    if real_scores.iter().chain(fake_scores).any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("discriminator scores must be finite".into()));
    }
    let clamp = |s: f64| s.clamp(SCORE_EPSILON, 1.0 - SCORE_EPSILON);
    let real = real_scores.iter().map(|&s| clamp(s).ln()).sum::<f64>() / real_scores.len() as f64;
    let fake = fake_scores.iter().map(|&s| (1.0 - clamp(s)).ln()).sum::<f64>() / fake_scores.len() as f64;
    Ok(real + fake)
}

/// Weights of the adversarial and brightness terms in the total loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub adversarial: f64,
    pub brightness: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { adversarial: 0.5, brightness: 1.0 }
    }
}

pub fn loss_total(pixel: f64, adversarial: f64, brightness: f64, weights: LossWeights) -> f64 {
    pixel + weights.adversarial * adversarial + weights.brightness * brightness
}

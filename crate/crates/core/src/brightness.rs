//! Non-uniform day-to-night brightness mapping.
//!
//! The chain runs in a fixed order: [`segment_sky`], [`build_illumination_mask`],
//! [`darken_sky`], [`pixelwise_gamma`], then [`adjust_sky_mean`].

use log::warn;

use crate::error::Result;
use crate::params::IlluminationSource;
use crate::raster::{clamp_unit, ensure_same_dims, luminance, DepthMap, Image, SkyMask};

/// Per-pixel illumination field `Ṡ` that scales the gamma exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationMask {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl IlluminationMask {
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
}

/// Marks a pixel as sky iff `1 - g >= threshold`.
pub fn segment_sky(depth: &DepthMap, threshold: f64) -> SkyMask {
    let data = depth.data().iter().map(|&g| 1.0 - g >= threshold).collect();
    SkyMask::new(depth.width(), depth.height(), data).expect("dimensions come from a valid depth map")
}

/// Initializes `S` from depth (or inverse depth) and scales it by
/// `sky_factor` on sky pixels and `ground_factor` elsewhere.
pub fn build_illumination_mask(
    depth: &DepthMap,
    sky: &SkyMask,
    sky_factor: f64,
    ground_factor: f64,
    source: IlluminationSource,
) -> Result<IlluminationMask> {
    ensure_same_dims(depth.dims(), sky.dims())?;
    let data = depth
        .data()
        .iter()
        .zip(sky.data())
        .map(|(&g, &is_sky)| {
            let s = match source {
                IlluminationSource::Depth => g,
                IlluminationSource::InverseDepth => 1.0 - g,
            };
            if is_sky {
                s * sky_factor
            } else {
                s * ground_factor
            }
        })
        .collect();
    Ok(IlluminationMask { width: depth.width(), height: depth.height(), data })
}

/// Divides sky pixels by `divisor`; other pixels are copied unchanged.
pub fn darken_sky(img: &Image, sky: &SkyMask, divisor: f64) -> Result<Image> {
    ensure_same_dims(img.dims(), sky.dims())?;
    let mut data = img.data().to_vec();
    for (px, _) in data.chunks_exact_mut(3).zip(sky.data()).filter(|(_, &s)| s) {
        for v in px {
            *v /= divisor;
        }
    }
    Ok(Image::from_clamped(img.width(), img.height(), data))
}

/// Raises every channel to the power `alpha * Ṡ(i, j)`, with `0^0 = 1`.
pub fn pixelwise_gamma(img: &Image, mask: &IlluminationMask, alpha: f64) -> Result<Image> {
    ensure_same_dims(img.dims(), mask.dims())?;
    let mut data = img.data().to_vec();
    for (px, &s) in data.chunks_exact_mut(3).zip(mask.data()) {
        let exponent = alpha * s;
        for v in px {
            *v = gamma(*v, exponent);
        }
    }
    Ok(Image::from_clamped(img.width(), img.height(), data))
}

#[inline]
pub(crate) fn gamma(v: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else if exponent == 1.0 {
        v
    } else {
        libm::pow(v, exponent)
    }
}

/// Mean luminance over sky pixels, or `None` for an empty mask.
pub fn sky_mean_luminance(img: &Image, sky: &SkyMask) -> Option<f64> {
    region_mean_luminance(img, sky, true)
}

/// Mean luminance over sky (`want_sky`) or non-sky pixels; `None` if the region is empty.
pub fn region_mean_luminance(img: &Image, sky: &SkyMask, want_sky: bool) -> Option<f64> {
    let (sum, n) = img
        .pixels()
        .zip(sky.data())
        .filter(|(_, &s)| s == want_sky)
        .fold((0.0, 0usize), |(sum, n), (px, _)| (sum + luminance(px), n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Result of a sky-mean adjustment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SkyAdjustment {
    /// Sky pixels were scaled by this factor.
    Scaled(f64),
    NoSky,
    BlackSky,
}

/// Scales sky pixels uniformly so their mean luminance approaches `target`,
/// clamping to `[0, 1]`. Empty or all-black skies are left untouched.
pub fn adjust_sky_mean(img: &Image, sky: &SkyMask, target: f64) -> Result<Image> {
    adjust_sky_mean_with_outcome(img, sky, target).map(|(img, _)| img)
}

pub fn adjust_sky_mean_with_outcome(
    img: &Image,
    sky: &SkyMask,
    target: f64,
) -> Result<(Image, SkyAdjustment)> {
    ensure_same_dims(img.dims(), sky.dims())?;
    let current = match sky_mean_luminance(img, sky) {
        None => {
            warn!("sky mask is empty; skipping sky mean adjustment");
            return Ok((img.clone(), SkyAdjustment::NoSky));
        }
        Some(0.0) => {
            warn!("sky region is black; skipping sky mean adjustment");
            return Ok((img.clone(), SkyAdjustment::BlackSky));
        }
        Some(m) => m,
    };
    let k = target / current;
    let mut data = img.data().to_vec();
    for (px, _) in data.chunks_exact_mut(3).zip(sky.data()).filter(|(_, &s)| s) {
        for v in px {
            *v = clamp_unit(*v * k);
        }
    }
    Ok((Image::from_clamped(img.width(), img.height(), data), SkyAdjustment::Scaled(k)))
}

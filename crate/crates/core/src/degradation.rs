//! Final composition of the hazy night image: darkened base plus glow layers
//! plus Gaussian noise, clamped once at the end.

use crate::error::Result;
use crate::light::GlowLayer;
use crate::raster::{ensure_same_dims, Image};
use crate::rng::StreamRng;

/// Zero-mean i.i.d. Gaussian noise over an RGB raster.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl NoiseField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height * 3] }
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
}

/// Draws `width * height * 3` values from `N(0, sigma^2)` in raster order.
/// `sigma == 0` yields an all-zero field without consuming the stream.
pub fn make_noise(rng: &mut StreamRng, width: usize, height: usize, sigma: f64) -> NoiseField {
    if sigma == 0.0 {
        return NoiseField::zeros(width, height);
    }
    let data = (0..width * height * 3).map(|_| sigma * rng.standard_normal()).collect();
    NoiseField { width, height, data }
}

/// `clamp(base + sum(glows) + noise, 0, 1)` per element. Glows are summed
/// in list order before the noise is added.
pub fn compose_hazy(base: &Image, glows: &[GlowLayer], noise: &NoiseField) -> Result<Image> {
    let dims = base.dims();
    for glow in glows {
        ensure_same_dims(dims, glow.dims())?;
    }
    ensure_same_dims(dims, noise.dims())?;

    let mut light = vec![0.0; base.data().len()];
    for glow in glows {
        for (acc, &g) in light.iter_mut().zip(glow.data()) {
            *acc += g;
        }
    }
    let data = base
        .data()
        .iter()
        .zip(&light)
        .zip(noise.data())
        .map(|((&b, &l), &n)| b + l + n)
        .collect();
    Ok(Image::from_clamped(base.width(), base.height(), data))
}

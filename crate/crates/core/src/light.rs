//! Active light sources: attenuation falloff, point and cone emitters, and
//! tinting into additive RGB glow layers.
//!
//! Distances are Euclidean pixel distances divided by the image diagonal
//! (the distance between opposite corner pixel centers), then multiplied by
//! a configurable scale. With a scale of 1, `D` lies in `[0, 1]`.
//!
//! Cone axes are 2-D unit vectors in `(x, y) = (col, row)` image coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{LightPlacement, SynthesisParams};
use crate::raster::SkyMask;
use crate::rng::StreamRng;

/// A single-channel real field, e.g. an attenuation map or a light's
/// intensity before tinting.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "expected {} field values for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
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

/// Additive RGB contribution of one light, before the final clamp.
#[derive(Debug, Clone, PartialEq)]
pub struct GlowLayer {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GlowLayer {
    /// Interleaved RGB data; values must be finite and non-negative.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::InvalidRaster(format!(
                "expected {} glow values for {width}x{height}, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidRaster(format!("glow value {v} is negative or non-finite")));
        }
        Ok(Self { width, height, data })
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

/// `1 / (xi1 + xi2 d + xi3 d^2)`
#[inline]
pub fn attenuation(distance: f64, xi: [f64; 3]) -> f64 {
    1.0 / (xi[0] + xi[1] * distance + xi[2] * distance * distance)
}

fn diagonal(width: usize, height: usize) -> f64 {
    let (w, h) = ((width - 1) as f64, (height - 1) as f64);
    let d = (w * w + h * h).sqrt();
    if d > 0.0 {
        d
    } else {
        1.0
    }
}

/// Attenuation of every pixel relative to a light at `center = (row, col)`.
pub fn attenuation_map(
    width: usize,
    height: usize,
    center: (usize, usize),
    xi: [f64; 3],
    distance_scale: f64,
) -> Field {
    let norm = distance_scale / diagonal(width, height);
    let (cr, cc) = (center.0 as f64, center.1 as f64);
    let mut data = Vec::with_capacity(width * height);
    for row in 0..height {
        let dr = row as f64 - cr;
        for col in 0..width {
            let dc = col as f64 - cc;
            let d = (dr * dr + dc * dc).sqrt() * norm;
            data.push(attenuation(d, xi));
        }
    }
    Field { width, height, data }
}

/// Isotropic emitter: `A * beta`.
pub fn render_point(atten: &Field, beta: f64) -> Field {
    Field {
        width: atten.width,
        height: atten.height,
        data: atten.data.iter().map(|&a| a * beta).collect(),
    }
}

/// Directional emitter: `A * clip(cos(dir, axis), 0, 1) * Q`, where `Q` is 1
/// inside the cone of the given half-angle around `axis` and 0 outside. The
/// apex pixel receives `A` unscaled.
pub fn render_cone(atten: &Field, apex: (usize, usize), axis: [f64; 2], half_angle: f64) -> Field {
    let (ar, ac) = (apex.0 as f64, apex.1 as f64);
    let mut data = Vec::with_capacity(atten.data.len());
    for row in 0..atten.height {
        let dy = row as f64 - ar;
        for col in 0..atten.width {
            let a = atten.data[row * atten.width + col];
            if (row, col) == apex {
                data.push(a);
                continue;
            }
            let dx = col as f64 - ac;
            let len = (dx * dx + dy * dy).sqrt();
            let cos = ((dx * axis[0] + dy * axis[1]) / len).clamp(-1.0, 1.0);
            let inside = libm::acos(cos) <= half_angle;
            data.push(if inside { a * cos.clamp(0.0, 1.0) } else { 0.0 });
        }
    }
    Field { width: atten.width, height: atten.height, data }
}

/// Multiplies a single-channel layer by an RGB tint.
pub fn colorize(layer: &Field, tint: [f64; 3]) -> GlowLayer {
    let data = layer
        .data
        .iter()
        .flat_map(|&v| [v * tint[0], v * tint[1], v * tint[2]])
        .collect();
    GlowLayer { width: layer.width, height: layer.height, data }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LightKind {
    Point,
    Cone {
        /// Unit vector in `(col, row)` order.
        axis: [f64; 2],
        half_angle: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightSource {
    #[serde(flatten)]
    pub kind: LightKind,
    /// `(row, col)` in pixels.
    pub center: [usize; 2],
    pub tint: [f64; 3],
    pub intensity: f64,
    pub attenuation: [f64; 3],
    pub distance_scale: f64,
}

impl LightSource {
    /// Renders this light's glow. Cones are scaled by the same intensity
    /// constant as point lights.
    pub fn render(&self, width: usize, height: usize) -> GlowLayer {
        let center = (self.center[0], self.center[1]);
        let atten = attenuation_map(width, height, center, self.attenuation, self.distance_scale);
        let layer = match self.kind {
            LightKind::Point => render_point(&atten, self.intensity),
            LightKind::Cone { axis, half_angle } => {
                render_point(&render_cone(&atten, center, axis, half_angle), self.intensity)
            }
        };
        colorize(&layer, self.tint)
    }
}

/// Draws the lights for one image.
///
/// Draw order per image: light count, then for each light its center,
/// kind and tint, followed by axis angle and half-angle for cones.
pub fn sample_lights(rng: &mut StreamRng, params: &SynthesisParams, sky: &SkyMask) -> Vec<LightSource> {
    let [n_min, n_max] = params.light_count;
    let count = rng.between(u64::from(n_min), u64::from(n_max));
    if count == 0 {
        return Vec::new();
    }
    let candidates: Vec<usize> = match params.light_placement {
        LightPlacement::NonSky => sky
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &s)| !s)
            .map(|(i, _)| i)
            .collect(),
        LightPlacement::WholeFrame => Vec::new(),
    };
    let total = sky.width() * sky.height();
    let [lo, hi] = params.cone_half_angle;

    (0..count)
        .map(|_| {
            let idx = if candidates.is_empty() {
                rng.below(total as u64) as usize
            } else {
                candidates[rng.below(candidates.len() as u64) as usize]
            };
            let center = [idx / sky.width(), idx % sky.width()];
            let is_cone = rng.below(2) == 1;
            let tint = params.palette[rng.below(params.palette.len() as u64) as usize];
            let kind = if is_cone {
                let theta = rng.uniform_range(0.0, 2.0 * std::f64::consts::PI);
                let half_angle = rng.uniform_range(lo, hi);
                LightKind::Cone { axis: [libm::cos(theta), libm::sin(theta)], half_angle }
            } else {
                LightKind::Point
            };
            LightSource {
                kind,
                center,
                tint,
                intensity: params.light_intensity,
                attenuation: params.attenuation,
                distance_scale: params.light_distance_scale,
            }
        })
        .collect()
}

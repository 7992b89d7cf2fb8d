#![allow(dead_code)]

use std::path::Path;

use nightforge_core::io::{save_image, write_pfm};
use nightforge_core::{DepthMap, Image};

/// Integer hash mapped to `[0, 1)`.
pub fn hash01(mut x: u64) -> f64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^= x >> 33;
    (x >> 11) as f64 / (1u64 << 53) as f64
}

/// A daytime scene: bright sky band on top (depth 0), textured ground below
/// with disparity growing toward the bottom edge. Returns the image, the raw
/// (un-normalized) disparity and the horizon row.
pub struct Scene {
    pub image: Image,
    pub raw_depth: Vec<f32>,
    pub horizon: usize,
}

pub fn daytime_scene(seed: u64, width: usize, height: usize, sky_fraction: f64) -> Scene {
    let horizon = ((height as f64 * sky_fraction).round() as usize).clamp(1, height - 2);
    let tint = hash01(seed.wrapping_mul(31));
    let mut px = Vec::with_capacity(width * height * 3);
    let mut depth = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let grain = 0.04 * (hash01(seed ^ ((r * width + c) as u64) << 8) - 0.5);
            if r < horizon {
                let t = r as f64 / horizon as f64;
                px.extend([0.45 + 0.15 * t + 0.1 * tint, 0.62 + 0.12 * t, 0.82 + 0.1 * t].map(|v| (v + grain).clamp(0.0, 1.0)));
                depth.push(0.0);
            } else {
                let block = ((r / 16) * 1000 + c / 16) as u64;
                let base = 0.3 + 0.4 * hash01(seed.wrapping_add(block * 7919));
                px.extend([base, 0.9 * base + 0.05, 0.7 * base + 0.05].map(|v| (v + grain).clamp(0.0, 1.0)));
                let t = (r - horizon) as f64 / (height - 1 - horizon) as f64;
                depth.push((5.0 + 45.0 * t) as f32);
            }
        }
    }
    Scene { image: Image::new(width, height, px).unwrap(), raw_depth: depth, horizon }
}

impl Scene {
    pub fn depth(&self) -> DepthMap {
        let raw: Vec<f64> = self.raw_depth.iter().map(|&v| f64::from(v)).collect();
        DepthMap::from_raw(self.image.width(), self.image.height(), &raw).unwrap()
    }

    pub fn write(&self, image_path: &Path, depth_path: &Path) {
        save_image(&self.image, image_path).unwrap();
        write_pfm(depth_path, self.image.width(), self.image.height(), &self.raw_depth).unwrap();
    }
}

/// Writes `count` scenes as `scene_XX.png` / `scene_XX.pfm`.
pub fn write_scene_set(image_dir: &Path, depth_dir: &Path, count: usize, size: usize, seed: u64) {
    for i in 0..count {
        let frac = 0.2 + 0.25 * hash01(seed + i as u64);
        let scene = daytime_scene(seed * 1000 + i as u64, size, size, frac);
        scene.write(
            &image_dir.join(format!("scene_{i:02}.png")),
            &depth_dir.join(format!("scene_{i:02}.pfm")),
        );
    }
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Which field initializes the illumination mask before sky/non-sky scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IlluminationSource {
    /// `S = g`
    #[default]
    Depth,
    /// `S = 1 - g`
    InverseDepth,
}

/// Where light centers may be placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LightPlacement {
    #[default]
    NonSky,
    WholeFrame,
}

/// Every knob of the synthesis chain. Serialized field names are the
/// config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisParams {
    /// Sky where `1 - g >= varrho`.
    #[serde(rename = "varrho")]
    pub sky_threshold: f64,
    /// Target mean sky luminance after the gamma stage.
    #[serde(rename = "mu")]
    pub sky_target_mean: f64,
    /// Illumination factor on sky pixels.
    #[serde(rename = "varphi1")]
    pub sky_illumination: f64,
    /// Illumination factor on non-sky pixels.
    #[serde(rename = "varphi2")]
    pub ground_illumination: f64,
    /// Sky brightness divisor.
    #[serde(rename = "rho")]
    pub sky_divisor: f64,
    /// Gamma degradation factor.
    #[serde(rename = "alpha")]
    pub gamma_factor: f64,
    /// Light intensity constant.
    #[serde(rename = "beta")]
    pub light_intensity: f64,
    /// Constant, linear and quadratic attenuation coefficients.
    #[serde(rename = "xi")]
    pub attenuation: [f64; 3],
    /// Multiplier applied to diagonal-normalized distances before attenuation.
    pub light_distance_scale: f64,
    pub noise_sigma: f64,
    /// Inclusive range for the number of lights per image.
    pub light_count: [u32; 2],
    /// Cone half-angle range in radians.
    pub cone_half_angle: [f64; 2],
    pub palette: Vec<[f64; 3]>,
    pub illumination_source: IlluminationSource,
    pub light_placement: LightPlacement,
}

pub const SODIUM: [f64; 3] = [1.0, 0.75, 0.35];
pub const COOL_WHITE: [f64; 3] = [0.9, 0.95, 1.0];
pub const NEON_RED: [f64; 3] = [1.0, 0.3, 0.3];
pub const NEON_GREEN: [f64; 3] = [0.4, 1.0, 0.5];

impl Default for SynthesisParams {
    fn default() -> Self {
        Self {
            sky_threshold: 0.98,
            sky_target_mean: 0.85,
            sky_illumination: 2.0,
            ground_illumination: 1.5,
            sky_divisor: 2.0,
            gamma_factor: 4.0,
            light_intensity: 1.0,
            attenuation: [1.0, 3.0, 1.8],
            light_distance_scale: 10.0,
            noise_sigma: 0.02,
            light_count: [1, 3],
            cone_half_angle: [PI / 6.0, PI / 3.0],
            palette: vec![SODIUM, COOL_WHITE, NEON_RED, NEON_GREEN],
            illumination_source: IlluminationSource::Depth,
            light_placement: LightPlacement::NonSky,
        }
    }
}

impl SynthesisParams {
    /// Parameters under which the whole synthesis chain is the identity for
    /// a constant non-sky depth `g`: no lights, no noise, no sky division and
    /// a gamma exponent of exactly one.
    pub fn identity_for_depth(g: f64) -> Self {
        Self {
            sky_divisor: 1.0,
            ground_illumination: 1.0 / (4.0 * g),
            gamma_factor: 4.0,
            noise_sigma: 0.0,
            light_count: [0, 0],
            ..Self::default()
        }
    }

    /// Returns one message per violated constraint, prefixed with the
    /// config key it refers to.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        let fin = |v: f64| v.is_finite();
        check(
            fin(self.sky_threshold) && self.sky_threshold > 0.0 && self.sky_threshold < 1.0,
            format!("varrho: must lie in (0, 1), got {}", self.sky_threshold),
        );
        check(
            fin(self.sky_target_mean) && self.sky_target_mean > 0.0 && self.sky_target_mean <= 1.0,
            format!("mu: must lie in (0, 1], got {}", self.sky_target_mean),
        );
        check(
            fin(self.sky_illumination) && self.sky_illumination >= 0.0,
            format!("varphi1: must be >= 0, got {}", self.sky_illumination),
        );
        check(
            fin(self.ground_illumination) && self.ground_illumination >= 0.0,
            format!("varphi2: must be >= 0, got {}", self.ground_illumination),
        );
        check(
            fin(self.sky_divisor) && self.sky_divisor >= 1.0,
            format!("rho: must be >= 1, got {}", self.sky_divisor),
        );
        check(
            fin(self.gamma_factor) && self.gamma_factor > 0.0,
            format!("alpha: must be > 0, got {}", self.gamma_factor),
        );
        check(
            fin(self.light_intensity) && self.light_intensity >= 0.0,
            format!("beta: must be >= 0, got {}", self.light_intensity),
        );
        let [x1, x2, x3] = self.attenuation;
        check(fin(x1) && x1 > 0.0, format!("xi[0]: must be > 0, got {x1}"));
        check(fin(x2) && x2 >= 0.0, format!("xi[1]: must be >= 0, got {x2}"));
        check(fin(x3) && x3 >= 0.0, format!("xi[2]: must be >= 0, got {x3}"));
        check(
            fin(self.light_distance_scale) && self.light_distance_scale > 0.0,
            format!("light_distance_scale: must be > 0, got {}", self.light_distance_scale),
        );
        check(
            fin(self.noise_sigma) && self.noise_sigma >= 0.0,
            format!("noise_sigma: must be >= 0, got {}", self.noise_sigma),
        );
        let [n_min, n_max] = self.light_count;
        check(
            n_min <= n_max,
            format!("light_count: minimum {n_min} exceeds maximum {n_max}"),
        );
        let [lo, hi] = self.cone_half_angle;
        for (i, a) in [lo, hi].into_iter().enumerate() {
            check(
                fin(a) && a > 0.0 && a <= PI / 2.0,
                format!("cone_half_angle[{i}]: must lie in (0, pi/2], got {a}"),
            );
        }
        check(lo <= hi, format!("cone_half_angle: minimum {lo} exceeds maximum {hi}"));
        check(
            !(self.palette.is_empty() && n_max > 0),
            "palette: must contain at least one tint when lights are enabled".to_string(),
        );
        for (i, tint) in self.palette.iter().enumerate() {
            for (c, v) in tint.iter().enumerate() {
                check(
                    fin(*v) && (0.0..=1.0).contains(v),
                    format!("palette[{i}][{c}]: must lie in [0, 1], got {v}"),
                );
            }
        }
        errs
    }
}

//! JSON pipeline configuration with defaults and field-path validation.

use std::path::PathBuf;

use log::warn;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::params::{IlluminationSource, LightPlacement, SynthesisParams};

pub const DEFAULT_GRID: (usize, usize) = (16, 16);

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub params: SynthesisParams,
    /// Brightness label grid as `(rows, cols)`.
    pub grid: (usize, usize),
    pub jobs: usize,
    pub seed: u64,
    pub input_dir: Option<PathBuf>,
    pub depth_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub sky_mask_dir: Option<PathBuf>,
    /// Square side length to resize inputs to before synthesis.
    pub resize: Option<usize>,
    pub strict: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            params: SynthesisParams::default(),
            grid: DEFAULT_GRID,
            jobs: 1,
            seed: 0,
            input_dir: None,
            depth_dir: None,
            output_dir: None,
            sky_mask_dir: None,
            resize: None,
            strict: false,
        }
    }
}

impl PipelineConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut errs = self.params.violations();
        if self.grid.0 == 0 || self.grid.1 == 0 {
            errs.push(format!("grid: dimensions must be positive, got {:?}", self.grid));
        }
        if self.jobs == 0 {
            errs.push("jobs: must be at least 1".into());
        }
        if self.resize == Some(0) {
            errs.push("resize: must be positive".into());
        }
        errs
    }
}

/// A parsed configuration and the warnings raised while parsing it.
#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub config: PipelineConfig,
    pub warnings: Vec<String>,
}

/// Parses a JSON config object. Missing keys take their defaults, unknown
/// keys are reported as warnings, and every constraint violation is
/// collected into a single [`Error::Config`].
pub fn validate_config(text: &str) -> Result<ValidatedConfig> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(map) = value else {
        return Err(Error::Config(vec!["<root>: expected a JSON object".into()]));
    };
    let mut cfg = PipelineConfig::default();
    let mut errs = Vec::new();
    let mut warnings = Vec::new();

    for (key, v) in &map {
        let res = apply_key(&mut cfg, key, v);
        match res {
            Ok(true) => {}
            Ok(false) => {
                let msg = format!("{key}: unknown key ignored");
                warn!("{msg}");
                warnings.push(msg);
            }
            Err(e) => errs.push(e),
        }
    }
    if errs.is_empty() {
        errs = cfg.violations();
    }
    if errs.is_empty() {
        Ok(ValidatedConfig { config: cfg, warnings })
    } else {
        Err(Error::Config(errs))
    }
}

/// Returns `Ok(false)` for keys that are not recognized.
fn apply_key(cfg: &mut PipelineConfig, key: &str, v: &Value) -> Result<bool, String> {
    let p = &mut cfg.params;
    match key {
        "varrho" => p.sky_threshold = num(v, key)?,
        "mu" => p.sky_target_mean = num(v, key)?,
        "varphi1" => p.sky_illumination = num(v, key)?,
        "varphi2" => p.ground_illumination = num(v, key)?,
        "rho" => p.sky_divisor = num(v, key)?,
        "alpha" => p.gamma_factor = num(v, key)?,
        "beta" => p.light_intensity = num(v, key)?,
        "xi" => p.attenuation = nums::<3>(v, key)?,
        "light_distance_scale" => p.light_distance_scale = num(v, key)?,
        "noise_sigma" => p.noise_sigma = num(v, key)?,
        "light_count" => {
            let [lo, hi] = uints::<2>(v, key)?;
            p.light_count = [to_u32(lo, key)?, to_u32(hi, key)?];
        }
        "cone_half_angle" => p.cone_half_angle = nums::<2>(v, key)?,
        "palette" => {
            let items = array(v, key)?;
            p.palette = items
                .iter()
                .enumerate()
                .map(|(i, t)| nums::<3>(t, &format!("{key}[{i}]")))
                .collect::<Result<_, _>>()?;
        }
        "illumination_source" => {
            p.illumination_source = match string(v, key)? {
                "depth" => IlluminationSource::Depth,
                "inverse-depth" => IlluminationSource::InverseDepth,
                other => return Err(format!("{key}: expected \"depth\" or \"inverse-depth\", got {other:?}")),
            }
        }
        "light_placement" => {
            p.light_placement = match string(v, key)? {
                "non-sky" => LightPlacement::NonSky,
                "whole-frame" => LightPlacement::WholeFrame,
                other => return Err(format!("{key}: expected \"non-sky\" or \"whole-frame\", got {other:?}")),
            }
        }
        "grid" => {
            let [h, w] = uints::<2>(v, key)?;
            cfg.grid = (h as usize, w as usize);
        }
        "jobs" => cfg.jobs = uint(v, key)? as usize,
        "seed" => cfg.seed = uint(v, key)?,
        "resize" => cfg.resize = if v.is_null() { None } else { Some(uint(v, key)? as usize) },
        "strict" => cfg.strict = v.as_bool().ok_or_else(|| format!("{key}: expected a boolean"))?,
        "input_dir" => cfg.input_dir = Some(path(v, key)?),
        "depth_dir" => cfg.depth_dir = Some(path(v, key)?),
        "output_dir" => cfg.output_dir = Some(path(v, key)?),
        "sky_mask_dir" => cfg.sky_mask_dir = if v.is_null() { None } else { Some(path(v, key)?) },
        _ => return Ok(false),
    }
    Ok(true)
}

fn num(v: &Value, path: &str) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("{path}: expected a number, got {v}"))
}

fn uint(v: &Value, path: &str) -> Result<u64, String> {
    v.as_u64().ok_or_else(|| format!("{path}: expected a non-negative integer, got {v}"))
}

fn to_u32(v: u64, path: &str) -> Result<u32, String> {
    u32::try_from(v).map_err(|_| format!("{path}: value {v} is too large"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str, String> {
    v.as_str().ok_or_else(|| format!("{path}: expected a string, got {v}"))
}

fn path(v: &Value, key: &str) -> Result<PathBuf, String> {
    string(v, key).map(PathBuf::from)
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, String> {
    v.as_array().ok_or_else(|| format!("{path}: expected an array, got {v}"))
}

fn fixed<'a, const N: usize>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, String> {
    let items = array(v, path)?;
    if items.len() != N {
        return Err(format!("{path}: expected {N} elements, got {}", items.len()));
    }
    Ok(items)
}

fn nums<const N: usize>(v: &Value, path: &str) -> Result<[f64; N], String> {
    let items = fixed::<N>(v, path)?;
    let mut out = [0.0; N];
    for (i, item) in items.iter().enumerate() {
        out[i] = num(item, &format!("{path}[{i}]"))?;
    }
    Ok(out)
}

fn uints<const N: usize>(v: &Value, path: &str) -> Result<[u64; N], String> {
    let items = fixed::<N>(v, path)?;
    let mut out = [0; N];
    for (i, item) in items.iter().enumerate() {
        out[i] = uint(item, &format!("{path}[{i}]"))?;
    }
    Ok(out)
}

/// Serializes the parameters as a config object that [`validate_config`]
/// accepts.
pub fn params_to_json(params: &SynthesisParams) -> Map<String, Value> {
    match serde_json::to_value(params) {
        Ok(Value::Object(map)) => map,
        _ => unreachable!("SynthesisParams serializes to an object"),
    }
}

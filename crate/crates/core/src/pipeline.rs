//! Per-image synthesis and the directory-level dataset run.
//!
//! Every input image gets an RNG stream keyed by its position in the sorted
//! list of input PNGs. Images are processed on a bounded rayon pool and the
//! results are collected in index order, so outputs do not depend on the
//! job count.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::brightness::{
    adjust_sky_mean_with_outcome, build_illumination_mask, darken_sky, pixelwise_gamma, region_mean_luminance,
    segment_sky, SkyAdjustment,
};
use crate::config::PipelineConfig;
use crate::degradation::{compose_hazy, make_noise};
use crate::error::{Error, Result};
use crate::io::{image_to_rgb8, load_depth, load_image, load_sky_mask, quantize, resize_depth, resize_image, save_gray, save_image};
use crate::light::{sample_lights, GlowLayer, LightSource};
use crate::params::SynthesisParams;
use crate::raster::{ensure_same_dims, DepthMap, Image, SkyMask};
use crate::rng::{Purpose, RngStream};
use crate::training::{brightness_label, BrightnessMap};

pub const MANIFEST_VERSION: &str = "nightforge-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// What happened while synthesizing one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    pub stream_index: u64,
    pub width: usize,
    pub height: usize,
    pub sky_fraction: f64,
    /// The sky covered the whole frame and sky-specific steps were skipped.
    pub degenerate_sky: bool,
    /// Multiplier applied to sky pixels to reach the target mean, if any.
    pub sky_scale: Option<f64>,
    pub lights: Vec<LightSource>,
    pub mean_luminance_clear: f64,
    pub mean_luminance_hazy: f64,
    pub sky_mean_hazy: Option<f64>,
    pub non_sky_mean_hazy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub hazy: Image,
    pub label: BrightnessMap,
    /// Effective sky mask (after the whole-frame fallback).
    pub sky: SkyMask,
    pub record: SynthesisRecord,
}

/// Runs the full chain on one clear image and its depth map:
/// sky segmentation, illumination mask, sky darkening, pixel-wise gamma,
/// sky-mean adjustment, light glows and noise, then the brightness label.
///
/// `sky_override` replaces the depth-thresholded sky mask when given.
pub fn synthesize_pair(
    clear: &Image,
    depth: &DepthMap,
    params: &SynthesisParams,
    grid: (usize, usize),
    rng: RngStream,
    sky_override: Option<&SkyMask>,
) -> Result<Synthesis> {
    ensure_same_dims(clear.dims(), depth.dims())?;
    let (width, height) = clear.dims();
    let mut sky = match sky_override {
        Some(mask) => {
            ensure_same_dims(clear.dims(), mask.dims())?;
            mask.clone()
        }
        None => segment_sky(depth, params.sky_threshold),
    };
    let degenerate_sky = sky.is_full();
    if degenerate_sky {
        warn!("stream {}: entire frame classified as sky; skipping sky-specific steps", rng.stream_index);
        sky = SkyMask::empty(width, height);
    }

    let mask = build_illumination_mask(
        depth,
        &sky,
        params.sky_illumination,
        params.ground_illumination,
        params.illumination_source,
    )?;
    let darkened = darken_sky(clear, &sky, params.sky_divisor)?;
    let mut night = pixelwise_gamma(&darkened, &mask, params.gamma_factor)?;
    let mut sky_scale = None;
    if !sky.is_empty() {
        let (adjusted, outcome) = adjust_sky_mean_with_outcome(&night, &sky, params.sky_target_mean)?;
        if let SkyAdjustment::Scaled(k) = outcome {
            sky_scale = Some(k);
        }
        night = adjusted;
    }

    let lights = sample_lights(&mut rng.generator(Purpose::Lights), params, &sky);
    let glows: Vec<GlowLayer> = lights.iter().map(|l| l.render(width, height)).collect();
    let noise = make_noise(&mut rng.generator(Purpose::Noise), width, height, params.noise_sigma);
    let hazy = compose_hazy(&night, &glows, &noise)?;
    let label = brightness_label(&hazy, grid)?;

    let record = SynthesisRecord {
        stream_index: rng.stream_index,
        width,
        height,
        sky_fraction: sky.sky_fraction(),
        degenerate_sky,
        sky_scale,
        lights,
        mean_luminance_clear: clear.mean_luminance(),
        mean_luminance_hazy: hazy.mean_luminance(),
        sky_mean_hazy: region_mean_luminance(&hazy, &sky, true),
        non_sky_mean_hazy: region_mean_luminance(&hazy, &sky, false),
    };
    Ok(Synthesis { hazy, label, sky, record })
}

/// SHA-256 over the 8-bit hazy RGB bytes followed by the 8-bit label bytes.
pub fn synthesis_digest(hazy: &Image, label: &BrightnessMap) -> String {
    let mut h = Sha256::new();
    h.update(image_to_rgb8(hazy).as_raw());
    h.update(label.data().iter().map(|&v| quantize(v)).collect::<Vec<u8>>());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub input: String,
    pub depth: String,
    pub sky_mask: Option<String>,
    pub hazy: String,
    pub clear: String,
    pub label: String,
    /// Exact label values, row-major at grid resolution.
    pub label_values: Vec<f64>,
    #[serde(flatten)]
    pub synthesis: SynthesisRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub stream_index: u64,
    pub input: String,
    pub depth: Option<String>,
    pub error: String,
}

/// Everything needed to reproduce a run. File names are relative to the
/// input, depth and output directories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: String,
    pub master_seed: u64,
    pub params: SynthesisParams,
    pub grid: [usize; 2],
    pub resize: Option<usize>,
    pub records: Vec<ImageRecord>,
    pub failures: Vec<FailureRecord>,
}

impl DatasetManifest {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[derive(Debug, Clone)]
struct PairJob {
    index: u64,
    stem: String,
    image: PathBuf,
    depth: Option<PathBuf>,
    sky_mask: Option<PathBuf>,
}

fn file_name(p: &Path) -> String {
    p.file_name().unwrap_or_default().to_string_lossy().into_owned()
}

fn has_ext(p: &Path, ext: &str) -> bool {
    p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Maps file stem to path for regular files with one of `exts`, first
/// extension winning on ties.
fn index_dir(dir: &Path, exts: &[&str]) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    for ext in exts {
        for p in paths.iter().filter(|p| has_ext(p, ext)) {
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                out.entry(stem.to_owned()).or_insert_with(|| p.clone());
            }
        }
    }
    Ok(out)
}

fn require_dir(dir: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    let dir = dir.clone().ok_or_else(|| Error::Config(vec![format!("{name}: required")]))?;
    if !dir.is_dir() {
        return Err(Error::Config(vec![format!("{name}: {} is not a directory", dir.display())]));
    }
    Ok(dir)
}

fn discover(config: &PipelineConfig, input: &Path, depth_dir: &Path) -> Result<Vec<PairJob>> {
    let images = index_dir(input, &["png"])?;
    let depths = index_dir(depth_dir, &["pfm", "png"])?;
    let masks = match &config.sky_mask_dir {
        Some(dir) => index_dir(dir, &["png"])?,
        None => BTreeMap::new(),
    };
    let jobs: Vec<PairJob> = images
        .into_iter()
        .enumerate()
        .map(|(i, (stem, image))| PairJob {
            index: i as u64,
            depth: depths.get(&stem).cloned(),
            sky_mask: masks.get(&stem).cloned(),
            stem,
            image,
        })
        .collect();
    if !jobs.iter().any(|j| j.depth.is_some()) {
        return Err(Error::NoPairs(input.to_owned()));
    }
    Ok(jobs)
}

fn process(job: &PairJob, config: &PipelineConfig, out_dir: &Path) -> Result<ImageRecord> {
    let depth_path = job
        .depth
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("no depth file with a matching stem".into()))?;
    let mut clear = load_image(&job.image)?;
    let mut depth = load_depth(depth_path)?;
    ensure_same_dims(clear.dims(), depth.dims())?;
    let mut sky_mask = match &job.sky_mask {
        Some(p) => {
            let m = load_sky_mask(p)?;
            ensure_same_dims(clear.dims(), m.dims())?;
            Some(m)
        }
        None => {
            if config.sky_mask_dir.is_some() {
                debug!("{}: no external sky mask, thresholding depth", job.stem);
            }
            None
        }
    };
    if let Some(side) = config.resize {
        clear = resize_image(&clear, side, side);
        depth = resize_depth(&depth, side, side)?;
        sky_mask = sky_mask.map(|m| resize_mask(&m, side, side));
    }

    let rng = RngStream::new(config.seed, job.index);
    let synth = synthesize_pair(&clear, &depth, &config.params, config.grid, rng, sky_mask.as_ref())?;

    let hazy_name = format!("{}_hazy.png", job.stem);
    let clear_name = format!("{}_clear.png", job.stem);
    let label_name = format!("{}_label.png", job.stem);
    save_image(&synth.hazy, out_dir.join(&hazy_name))?;
    save_image(&clear, out_dir.join(&clear_name))?;
    save_gray(synth.label.width(), synth.label.height(), synth.label.data(), out_dir.join(&label_name))?;

    Ok(ImageRecord {
        input: file_name(&job.image),
        depth: file_name(depth_path),
        sky_mask: job.sky_mask.as_deref().map(file_name),
        hazy: hazy_name,
        clear: clear_name,
        label: label_name,
        label_values: synth.label.data().to_vec(),
        synthesis: synth.record,
    })
}

fn resize_mask(mask: &SkyMask, width: usize, height: usize) -> SkyMask {
    let mut data = Vec::with_capacity(width * height);
    for r in 0..height {
        let sr = r * mask.height() / height;
        for c in 0..width {
            data.push(mask.is_sky(sr, c * mask.width() / width));
        }
    }
    SkyMask::new(width, height, data).expect("positive resize dimensions")
}

/// Synthesizes every image/depth pair found in the configured directories
/// and writes outputs plus `manifest.json` into the output directory.
///
/// Per-image failures are recorded in the manifest unless `strict` is set,
/// in which case the first failure (in stream order) aborts the run.
pub fn run_pipeline(config: &PipelineConfig) -> Result<DatasetManifest> {
    let errs = config.violations();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let input = require_dir(&config.input_dir, "input_dir")?;
    let depth_dir = require_dir(&config.depth_dir, "depth_dir")?;
    if config.sky_mask_dir.is_some() {
        require_dir(&config.sky_mask_dir, "sky_mask_dir")?;
    }
    let out_dir = config
        .output_dir
        .clone()
        .ok_or_else(|| Error::Config(vec!["output_dir: required".into()]))?;
    let jobs = discover(config, &input, &depth_dir)?;
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    let results: Vec<(PairJob, Result<ImageRecord>)> = pool.install(|| {
        jobs.into_par_iter()
            .map(|job| {
                let res = process(&job, config, &out_dir);
                (job, res)
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (job, res) in results {
        match res {
            Ok(rec) => records.push(rec),
            Err(e) => {
                if config.strict {
                    return Err(e);
                }
                warn!("{}: {e}", file_name(&job.image));
                failures.push(FailureRecord {
                    stream_index: job.index,
                    input: file_name(&job.image),
                    depth: job.depth.as_deref().map(file_name),
                    error: e.to_string(),
                });
            }
        }
    }

    let manifest = DatasetManifest {
        version: MANIFEST_VERSION.to_owned(),
        master_seed: config.seed,
        params: config.params.clone(),
        grid: [config.grid.0, config.grid.1],
        resize: config.resize,
        records,
        failures,
    };
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()?).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

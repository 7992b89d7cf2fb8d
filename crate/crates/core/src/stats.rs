//! Brightness statistics: channel-mean pseudo-color images, luminance
//! histograms, and side-by-side comparison of image sets.

use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rayon::prelude::*;
use serde::Serialize;

use crate::brightness::region_mean_luminance;
use crate::error::{Error, Result};
use crate::io::{load_image, save_image};
use crate::raster::{ensure_same_dims, luminance, Image, SkyMask};

pub const DEFAULT_BINS: usize = 32;
pub const CSV_SCHEMA: &str = "# nightforge-stats v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrightnessStats {
    pub channel_means: [f64; 3],
    pub luminance_mean: f64,
    pub sky_mean: Option<f64>,
    pub non_sky_mean: Option<f64>,
    /// Luminance histogram over `[0, 1]`, normalized to unit mass.
    pub histogram: Vec<f64>,
}

/// Image of the same size where every pixel is the per-channel mean.
pub fn channel_mean_image(img: &Image) -> Image {
    let means = channel_means(img);
    Image::filled(img.width(), img.height(), means).expect("means of a valid image are valid")
}

fn channel_means(img: &Image) -> [f64; 3] {
    let mut sums = [0.0; 3];
    for px in img.pixels() {
        for c in 0..3 {
            sums[c] += px[c];
        }
    }
    let n = img.pixel_count() as f64;
    sums.map(|s| (s / n).clamp(0.0, 1.0))
}

/// Bin index for a value in `[0, 1]`: `[k/bins, (k+1)/bins)`, last bin closed.
#[inline]
pub fn bin_index(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

fn histogram_counts(img: &Image, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    for px in img.pixels() {
        counts[bin_index(luminance(px), bins)] += 1;
    }
    counts
}

fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

pub fn compute_stats(img: &Image, sky: Option<&SkyMask>, bins: usize) -> Result<BrightnessStats> {
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    let (sky_mean, non_sky_mean) = match sky {
        Some(mask) => {
            ensure_same_dims(img.dims(), mask.dims())?;
            (region_mean_luminance(img, mask, true), region_mean_luminance(img, mask, false))
        }
        None => (None, None),
    };
    Ok(BrightnessStats {
        channel_means: channel_means(img),
        luminance_mean: img.mean_luminance(),
        sky_mean,
        non_sky_mean,
        histogram: normalize(&histogram_counts(img, bins)),
    })
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub bins: usize,
    pub channel_means: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, channel_means: false }
    }
}

#[derive(Debug, Clone)]
pub struct ImageStats {
    pub name: String,
    pub stats: BrightnessStats,
    counts: Vec<u64>,
}

/// Aggregate over one image set. Means are averages of per-image means;
/// the histogram pools every pixel of the set.
#[derive(Debug, Clone)]
pub struct SetSummary {
    pub name: String,
    pub images: Vec<ImageStats>,
    pub channel_means: [f64; 3],
    pub luminance_mean: f64,
    pub pooled_histogram: Vec<f64>,
}

fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Loads and summarizes every PNG in `dir`.
pub fn summarize_set(name: &str, dir: &Path, bins: usize) -> Result<SetSummary> {
    let files = list_pngs(dir)?;
    if files.is_empty() {
        return Err(Error::InvalidArgument(format!("set {name}: no PNG images in {}", dir.display())));
    }
    let images = files
        .par_iter()
        .map(|path| {
            let img = load_image(path)?;
            let stats = compute_stats(&img, None, bins)?;
            let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Ok(ImageStats { name, stats, counts: histogram_counts(&img, bins) })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = images.len() as f64;
    let mut channel_means = [0.0; 3];
    let mut luminance_mean = 0.0;
    let mut pooled = vec![0u64; bins];
    for s in &images {
        for (acc, m) in channel_means.iter_mut().zip(s.stats.channel_means) {
            *acc += m / n;
        }
        luminance_mean += s.stats.luminance_mean / n;
        for (p, c) in pooled.iter_mut().zip(&s.counts) {
            *p += c;
        }
    }
    Ok(SetSummary {
        name: name.to_owned(),
        images,
        channel_means,
        luminance_mean,
        pooled_histogram: normalize(&pooled),
    })
}

/// Writes `stats.csv` and `histogram.png` for the given named sets into
/// `out_dir`, plus `<set>/<stem>_chanmean.png` per image when requested.
pub fn compare_sets(sets: &[(String, PathBuf)], out_dir: &Path, opts: &ReportOptions) -> Result<Vec<SetSummary>> {
    if sets.is_empty() {
        return Err(Error::InvalidArgument("at least one image set is required".into()));
    }
    if opts.bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let summaries = sets
        .iter()
        .map(|(name, dir)| summarize_set(name, dir, opts.bins))
        .collect::<Result<Vec<_>>>()?;

    write_csv(&summaries, &out_dir.join("stats.csv"), opts.bins)?;
    render_histograms(&summaries, opts.bins).save(out_dir.join("histogram.png")).map_err(|source| {
        Error::Image { path: out_dir.join("histogram.png"), source }
    })?;

    if opts.channel_means {
        for (name, dir) in sets {
            let set_dir = out_dir.join(name);
            fs::create_dir_all(&set_dir).map_err(|e| Error::io(&set_dir, e))?;
            list_pngs(dir)?.par_iter().try_for_each(|path| {
                let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                let img = load_image(path)?;
                save_image(&channel_mean_image(&img), set_dir.join(format!("{stem}_chanmean.png")))
            })?;
        }
    }
    Ok(summaries)
}

fn write_csv(summaries: &[SetSummary], path: &Path, bins: usize) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(CSV_SCHEMA.as_bytes());
    out.push(b'\n');
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["set".to_string(), "row".into(), "name".into()];
        header.extend(["mean_r", "mean_g", "mean_b", "mean_luminance"].map(String::from));
        header.extend((0..bins).map(|k| format!("h{k:02}")));
        w.write_record(&header)?;
        let fmt = |v: f64| format!("{v:.9}");
        for s in summaries {
            for img in &s.images {
                let mut rec = vec![s.name.clone(), "image".into(), img.name.clone()];
                rec.extend(img.stats.channel_means.map(fmt));
                rec.push(fmt(img.stats.luminance_mean));
                rec.extend(img.stats.histogram.iter().map(|&v| fmt(v)));
                w.write_record(&rec)?;
            }
            let mut rec = vec![s.name.clone(), "summary".into(), format!("{} images", s.images.len())];
            rec.extend(s.channel_means.map(fmt));
            rec.push(fmt(s.luminance_mean));
            rec.extend(s.pooled_histogram.iter().map(|&v| fmt(v)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

const SERIES_COLORS: [[u8; 3]; 6] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
];

/// Grouped bar chart of each set's pooled histogram.
pub fn render_histograms(summaries: &[SetSummary], bins: usize) -> RgbImage {
    let (width, height, margin) = (800u32, 400u32, 20u32);
    let mut canvas = RgbImage::from_pixel(width, height, Rgb([255, 255, 255]));
    let plot_w = width - 2 * margin;
    let plot_h = height - 2 * margin;
    let peak = summaries
        .iter()
        .flat_map(|s| s.pooled_histogram.iter().copied())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let group_w = plot_w as f64 / bins as f64;
    let bar_w = (group_w / summaries.len().max(1) as f64).max(1.0);

    for (si, s) in summaries.iter().enumerate() {
        let color = Rgb(SERIES_COLORS[si % SERIES_COLORS.len()]);
        for (k, &mass) in s.pooled_histogram.iter().enumerate() {
            let x0 = margin as f64 + k as f64 * group_w + si as f64 * bar_w;
            let bar_h = (mass / peak * plot_h as f64).round() as u32;
            for x in x0.floor() as u32..((x0 + bar_w).floor() as u32).min(width - margin) {
                for y in (height - margin - bar_h)..(height - margin) {
                    canvas.put_pixel(x, y, color);
                }
            }
        }
    }
    for x in margin..width - margin {
        canvas.put_pixel(x, height - margin, Rgb([0, 0, 0]));
    }
    for y in margin..=height - margin {
        canvas.put_pixel(margin - 1, y, Rgb([0, 0, 0]));
    }
    canvas
}

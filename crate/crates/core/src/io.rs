//! PNG and PFM reading and writing.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::raster::{DepthMap, Image, SkyMask};

fn open_png(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format() != Some(ImageFormat::Png) {
        return Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: "not a PNG file".into(),
        });
    }
    let img = reader.decode().map_err(|source| Error::Image { path: path.to_owned(), source })?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::EmptyImage);
    }
    Ok(img)
}

/// Reads an 8-bit PNG as an [`Image`] with values `byte / 255`.
///
/// Grayscale is replicated into all three channels and alpha is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let img = open_png(path)?;
    let rgb = match img {
        DynamicImage::ImageRgb8(rgb) => rgb,
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => {
            img.to_rgb8()
        }
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                reason: format!("expected 8-bit RGB or grayscale, found {:?}", other.color()),
            })
        }
    };
    Ok(image_from_rgb8(&rgb))
}

pub(crate) fn image_from_rgb8(rgb: &RgbImage) -> Image {
    let data = rgb.as_raw().iter().map(|&b| f64::from(b) / 255.0).collect();
    Image::from_clamped(rgb.width() as usize, rgb.height() as usize, data)
}

/// Quantizes to 8-bit: each byte is `round(value * 255)`.
pub fn image_to_rgb8(img: &Image) -> RgbImage {
    let bytes = img.data().iter().map(|&v| quantize(v)).collect();
    RgbImage::from_raw(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer length matches dimensions")
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    image_to_rgb8(img)
        .save_with_format(path, ImageFormat::Png)
        .map_err(|source| image_write_error(path, source))
}

/// Writes a single-channel `[0, 1]` field as an 8-bit grayscale PNG.
pub fn save_gray(width: usize, height: usize, values: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = values.iter().map(|&v| quantize(v)).collect();
    GrayImage::from_raw(width as u32, height as u32, bytes)
        .ok_or_else(|| Error::InvalidRaster("gray buffer length mismatch".into()))?
        .save_with_format(path, ImageFormat::Png)
        .map_err(|source| image_write_error(path, source))
}

fn image_write_error(path: &Path, source: image::ImageError) -> Error {
    match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Image { path: path.to_owned(), source },
    }
}

/// Reads a depth map from a grayscale PNG (8 or 16 bit) or a PFM file and
/// min-max normalizes it to `[0, 1]`.
pub fn load_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let is_pfm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pfm"));
    let (width, height, raw) = if is_pfm {
        read_pfm(path)?
    } else {
        let img = open_png(path)?;
        let gray = match img {
            DynamicImage::ImageLuma16(g) => g,
            DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
                img.to_luma16()
            }
            other => {
                return Err(Error::UnsupportedFormat {
                    path: path.to_owned(),
                    reason: format!("depth PNG must be grayscale, found {:?}", other.color()),
                })
            }
        };
        let raw = gray.as_raw().iter().map(|&v| f64::from(v)).collect();
        (gray.width() as usize, gray.height() as usize, raw)
    };
    DepthMap::from_raw(width, height, &raw).map_err(|e| match e {
        Error::InvalidRaster(_) => Error::NonFinite(path.to_owned()),
        other => other,
    })
}

/// Reads a single-channel PFM (`Pf`). Rows are returned top to bottom.
pub fn read_pfm(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let unsupported = |reason: &str| Error::UnsupportedFormat {
        path: path.to_owned(),
        reason: reason.to_owned(),
    };

    let mut tokens = Vec::with_capacity(4);
    let mut line = String::new();
    while tokens.len() < 4 {
        line.clear();
        let n = reader.read_line(&mut line).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Err(unsupported("truncated PFM header"));
        }
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    if tokens.len() != 4 {
        return Err(unsupported("malformed PFM header"));
    }
    match tokens[0].as_str() {
        "Pf" => {}
        "PF" => return Err(unsupported("color PFM is not a depth map")),
        _ => return Err(unsupported("missing PFM magic")),
    }
    let width: usize = tokens[1].parse().map_err(|_| unsupported("bad PFM width"))?;
    let height: usize = tokens[2].parse().map_err(|_| unsupported("bad PFM height"))?;
    let scale: f64 = tokens[3].parse().map_err(|_| unsupported("bad PFM scale"))?;
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(unsupported("PFM scale must be non-zero"));
    }
    let little_endian = scale < 0.0;

    let mut bytes = vec![0u8; width * height * 4];
    reader
        .read_exact(&mut bytes)
        .map_err(|_| unsupported("truncated PFM pixel data"))?;
    let mut values = vec![0.0; width * height];
    // PFM stores the bottom row first.
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        if !v.is_finite() {
            return Err(Error::NonFinite(path.to_owned()));
        }
        let (src_row, col) = (i / width, i % width);
        values[(height - 1 - src_row) * width + col] = f64::from(v);
    }
    Ok((width, height, values))
}

/// Writes a little-endian single-channel PFM. `values` are top to bottom.
pub fn write_pfm(path: impl AsRef<Path>, width: usize, height: usize, values: &[f32]) -> Result<()> {
    let path = path.as_ref();
    if values.len() != width * height {
        return Err(Error::InvalidRaster("PFM buffer length mismatch".into()));
    }
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    for row in (0..height).rev() {
        for v in &values[row * width..(row + 1) * width] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| Error::io(path, e))
}

/// Reads an external sky mask: any non-zero grayscale value marks sky.
pub fn load_sky_mask(path: impl AsRef<Path>) -> Result<SkyMask> {
    let path = path.as_ref();
    let gray = open_png(path)?.to_luma8();
    let data = gray.as_raw().iter().map(|&v| v > 0).collect();
    SkyMask::new(gray.width() as usize, gray.height() as usize, data)
}

/// Bilinear resize of an image to `width` x `height`.
pub fn resize_image(img: &Image, width: usize, height: usize) -> Image {
    if img.dims() == (width, height) {
        return img.clone();
    }
    let buf = image::Rgb32FImage::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.data().iter().map(|&v| v as f32).collect(),
    )
    .expect("buffer length matches dimensions");
    let out = image::imageops::resize(&buf, width as u32, height as u32, image::imageops::FilterType::Triangle);
    Image::from_clamped(width, height, out.into_raw().into_iter().map(f64::from).collect())
}

/// Bilinear resize of a depth map; the result is min-max renormalized.
pub fn resize_depth(depth: &DepthMap, width: usize, height: usize) -> Result<DepthMap> {
    if depth.dims() == (width, height) {
        return Ok(depth.clone());
    }
    let buf = image::ImageBuffer::<image::Luma<f32>, Vec<f32>>::from_raw(
        depth.width() as u32,
        depth.height() as u32,
        depth.data().iter().map(|&v| v as f32).collect(),
    )
    .expect("buffer length matches dimensions");
    let out = image::imageops::resize(&buf, width as u32, height as u32, image::imageops::FilterType::Triangle);
    let raw: Vec<f64> = out.into_raw().into_iter().map(f64::from).collect();
    DepthMap::from_raw(width, height, &raw)
}

//! Image and report files. Every write goes to a temporary file in the
//! destination directory and is renamed into place.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{ImageEncoder, ImageFormat, RgbImage};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::colorspace::quantise;
use crate::error::{Error, Result};
use crate::pixels::Pixels;
use crate::scalar::Scalar;

pub const JPEG_QUALITY: u8 = 95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Png,
    Jpeg,
}

impl OutputFormat {
    /// JPEG for `.jpg`/`.jpeg` paths, PNG otherwise.
    pub fn for_path(path: &Path) -> Self {
        match ImageFormat::from_path(path) {
            Ok(ImageFormat::Jpeg) => Self::Jpeg,
            _ => Self::Png,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Decodes any supported image to companded sRGB in [0, 1]. Alpha is dropped.
pub fn load_image<T: Scalar>(path: &Path) -> Result<Pixels<T>> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = img.to_rgb8();
    rgb_image_to_pixels(&rgb)
}

pub fn rgb_image_to_pixels<T: Scalar>(img: &RgbImage) -> Result<Pixels<T>> {
    let scale = T::lit(255.0);
    let rows = img
        .pixels()
        .map(|p| p.0.map(|v| T::from_u8(v).unwrap() / scale))
        .collect();
    Pixels::new(img.width() as usize, img.height() as usize, rows)
}

/// Quantises to 8 bits per channel (clamping to [0, 1] first).
pub fn pixels_to_rgb_image<T: Scalar>(img: &Pixels<T>) -> RgbImage {
    let bytes: Vec<u8> = img.rows().iter().flat_map(|p| p.map(quantise)).collect();
    RgbImage::from_raw(img.width() as u32, img.height() as u32, bytes).expect("buffer matches dimensions")
}

/// Writes `bytes` produced by `fill` atomically to `path`.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(path))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush().map_err(io_err(path))?;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = std::fs::metadata(path).map(|m| m.permissions().mode()).unwrap_or(0o644);
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(mode))
            .map_err(io_err(path))?;
    }
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

pub fn save_image<T: Scalar>(path: &Path, img: &Pixels<T>) -> Result<()> {
    let rgb = pixels_to_rgb_image(img);
    let (w, h) = (rgb.width(), rgb.height());
    let image_err = |source| Error::Image {
        path: path.to_path_buf(),
        source,
    };
    write_atomic(path, |out| {
        match OutputFormat::for_path(path) {
            OutputFormat::Png => PngEncoder::new(out).write_image(&rgb, w, h, image::ExtendedColorType::Rgb8),
            OutputFormat::Jpeg => {
                JpegEncoder::new_with_quality(out, JPEG_QUALITY).write_image(&rgb, w, h, image::ExtendedColorType::Rgb8)
            }
        }
        .map_err(image_err)
    })
}

pub fn save_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value).map_err(|source| Error::Report {
            path: path.to_path_buf(),
            source,
        })?;
        out.write_all(b"\n").map_err(io_err(path))
    })
}

pub fn load_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| Error::Report {
        path: path.to_path_buf(),
        source,
    })
}

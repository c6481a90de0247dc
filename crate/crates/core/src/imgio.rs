//! Readers and writers for the map, image and report formats.
//!
//! * PFM: single-channel `Pf` float maps. A negative scale means
//!   little-endian samples, positive big-endian; rows are stored bottom-up.
//!   Non-finite samples load as invalid pixels and invalid pixels are written
//!   as `+inf`. Samples are single precision.
//! * PNG16: 16-bit grayscale disparity, `value = raw / 256`, `raw == 0`
//!   marks an invalid pixel.
//! * Images: 8- or 16-bit PNG and binary PGM/PPM, normalised to [0, 1].
//!
//! Every writer stages the bytes in a sibling temp file and renames it into
//! place.

use std::fs;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::map::{ImageBuffer, ScalarMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Pfm,
    Png16,
}

impl MapFormat {
    /// `.pfm` or `.png`, case-insensitive.
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("pfm") => Ok(MapFormat::Pfm),
            Some("png") => Ok(MapFormat::Png16),
            _ => Err(Error::InvalidParameter(format!(
                "cannot infer map format of {} (expected .pfm or .png)",
                path.display()
            ))),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(format: &'static str, path: &Path, reason: impl Into<String>) -> Error {
    Error::Malformed {
        format,
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Writes `bytes` to `path` through a temp file in the same directory.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn read_map(path: &Path, format: MapFormat) -> Result<ScalarMap> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    match format {
        MapFormat::Pfm => decode_pfm(&bytes, path),
        MapFormat::Png16 => decode_png16(&bytes, path),
    }
}

pub fn write_map(map: &ScalarMap, path: &Path, format: MapFormat) -> Result<()> {
    let bytes = match format {
        MapFormat::Pfm => encode_pfm(map)?,
        MapFormat::Png16 => encode_png16(map)?,
    };
    atomic_write(path, &bytes)
}

/// Next whitespace-delimited header token starting at `*pos`.
fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return None;
    }
    std::str::from_utf8(&bytes[start..*pos]).ok()
}

pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<ScalarMap> {
    const F: &str = "PFM";
    let mut pos = 0;
    match header_token(bytes, &mut pos) {
        Some("Pf") => {}
        Some("PF") => return Err(malformed(F, path, "3-channel PFM is not a scalar map")),
        other => return Err(malformed(F, path, format!("bad magic {other:?}"))),
    }
    let mut dim = |what: &str| -> Result<usize> {
        header_token(bytes, &mut pos)
            .and_then(|t| t.parse::<usize>().ok())
            .filter(|&v| v > 0)
            .ok_or_else(|| malformed(F, path, format!("bad {what}")))
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let scale: f64 = header_token(bytes, &mut pos)
        .and_then(|t| t.parse().ok())
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| malformed(F, path, "bad scale"))?;
    // exactly one whitespace byte separates the header from the samples
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(malformed(F, path, "missing header terminator"));
    }
    pos += 1;
    let len = width
        .checked_mul(height)
        .filter(|&n| n.checked_mul(4).is_some())
        .ok_or_else(|| malformed(F, path, "dimension overflow"))?;
    let data = &bytes[pos..];
    if data.len() != len * 4 {
        return Err(malformed(
            F,
            path,
            format!("expected {} sample bytes, found {}", len * 4, data.len()),
        ));
    }
    let little = scale < 0.0;
    let mut values = vec![0.0; len];
    let mut valid = vec![false; len];
    for (k, chunk) in data.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (file_row, x) = (k / width, k % width);
        let i = (height - 1 - file_row) * width + x;
        if v.is_finite() {
            values[i] = f64::from(v);
            valid[i] = true;
        }
    }
    ScalarMap::with_mask(width, height, values, valid)
}

pub fn encode_pfm(map: &ScalarMap) -> Result<Vec<u8>> {
    let (w, h) = (map.width(), map.height());
    let header = format!("Pf\n{w} {h}\n-1\n");
    let mut out = Vec::with_capacity(header.len() + w * h * 4);
    out.extend_from_slice(header.as_bytes());
    for y in (0..h).rev() {
        for x in 0..w {
            let v = match map.value(x, y) {
                Some(v) => {
                    let f = v as f32;
                    if !f.is_finite() {
                        return Err(Error::OutOfRange { format: "PFM", value: v });
                    }
                    f
                }
                None => f32::INFINITY,
            };
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub const PNG16_SCALE: f64 = 256.0;
pub const PNG16_MAX: f64 = u16::MAX as f64 / PNG16_SCALE;

pub fn decode_png16(bytes: &[u8], path: &Path) -> Result<ScalarMap> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let DynamicImage::ImageLuma16(buf) = img else {
        return Err(malformed(
            "PNG16",
            path,
            format!("expected 16-bit grayscale, found {:?}", img.color()),
        ));
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let raw = buf.into_raw();
    let valid: Vec<bool> = raw.iter().map(|&r| r != 0).collect();
    let values = raw.iter().map(|&r| f64::from(r) / PNG16_SCALE).collect();
    ScalarMap::with_mask(w, h, values, valid)
}

/// Valid values must lie in `[0, 65535/256]`. Values that would round to the
/// invalid sentinel are stored as raw 1.
pub fn encode_png16(map: &ScalarMap) -> Result<Vec<u8>> {
    let (w, h) = (map.width(), map.height());
    let mut raw = Vec::with_capacity(w * h);
    for (&v, &ok) in map.values().iter().zip(map.mask()) {
        if !ok {
            raw.push(0u16);
            continue;
        }
        let r = (v * PNG16_SCALE).round();
        if !(v >= 0.0) || r > f64::from(u16::MAX) {
            return Err(Error::OutOfRange { format: "PNG16", value: v });
        }
        raw.push((r as u16).max(1));
    }
    let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(w as u32, h as u32, raw)
        .expect("buffer length matches dimensions");
    encode_image(DynamicImage::ImageLuma16(buf), ImageFormat::Png)
}

fn encode_image(img: DynamicImage, format: ImageFormat) -> Result<Vec<u8>> {
    let mut cursor = Cursor::new(Vec::new());
    img.write_to(&mut cursor, format).map_err(|source| Error::Image {
        path: PathBuf::from("<memory>"),
        source,
    })?;
    Ok(cursor.into_inner())
}

/// Reads a PNG/PGM/PPM image as 1 or 3 channels in [0, 1]. Alpha is dropped.
pub fn read_image(path: &Path) -> Result<ImageBuffer> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let color = img.color();
    let gray = color.channel_count() <= 2;
    let sixteen = color.bytes_per_pixel() / color.channel_count() >= 2;
    let data: Vec<f64> = match (gray, sixteen) {
        (true, false) => img.to_luma8().into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect(),
        (true, true) => img.to_luma16().into_raw().into_iter().map(|v| f64::from(v) / 65535.0).collect(),
        (false, false) => img.to_rgb8().into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect(),
        (false, true) => img.to_rgb16().into_raw().into_iter().map(|v| f64::from(v) / 65535.0).collect(),
    };
    ImageBuffer::new(w, h, if gray { 1 } else { 3 }, data)
}

/// Writes an 8-bit image; the container follows the extension (`.png`,
/// `.pgm`, `.ppm`).
pub fn write_image(image: &ImageBuffer, path: &Path) -> Result<()> {
    let format = ImageFormat::from_path(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let bytes: Vec<u8> = image
        .data()
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    let (w, h) = (image.width() as u32, image.height() as u32);
    let dynamic = if image.channels() == 1 {
        DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, bytes).expect("length matches"))
    } else {
        DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, bytes).expect("length matches"))
    };
    atomic_write(path, &encode_image(dynamic, format)?)
}

/// Blue (0) through green to red (1). Invalid pixels are black.
pub fn colorize(map: &ScalarMap) -> ImageBuffer {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [0.0, 0.0, 0.5]),
        (0.25, [0.0, 0.3, 1.0]),
        (0.5, [0.0, 0.9, 0.3]),
        (0.75, [1.0, 0.85, 0.0]),
        (1.0, [0.8, 0.0, 0.0]),
    ];
    let mut data = Vec::with_capacity(map.len() * 3);
    for (&v, &ok) in map.values().iter().zip(map.mask()) {
        if !ok {
            data.extend_from_slice(&[0.0; 3]);
            continue;
        }
        let t = v.clamp(0.0, 1.0);
        let k = STOPS.iter().rposition(|s| s.0 <= t).unwrap_or(0).min(STOPS.len() - 2);
        let (t0, c0) = STOPS[k];
        let (t1, c1) = STOPS[k + 1];
        let f = (t - t0) / (t1 - t0);
        for c in 0..3 {
            data.push(c0[c] + f * (c1[c] - c0[c]));
        }
    }
    ImageBuffer::new(map.width(), map.height(), 3, data).expect("colormap stays in [0, 1]")
}

/// Header plus rows, `,`-separated and LF-terminated.
pub fn csv_string<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.as_ref().join(","));
        s.push('\n');
    }
    s
}

/// `density,epe` rows.
pub fn curve_csv(samples: &[(f64, f64)]) -> String {
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|&(d, e)| vec![d.to_string(), e.to_string()])
        .collect();
    csv_string(&["density", "epe"], &rows)
}

/// `metric,value` rows.
pub fn metrics_csv(rows: &[(String, f64)]) -> String {
    let rows: Vec<Vec<String>> = rows.iter().map(|(k, v)| vec![k.clone(), v.to_string()]).collect();
    csv_string(&["metric", "value"], &rows)
}

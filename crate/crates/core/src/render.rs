//! Rasterization of sampled Green fields to portable pixmaps.
//!
//! The palette is fixed so images are bit-reproducible: filled-set pixels
//! are green, pixels whose 8-neighborhood straddles the boundary are black,
//! and exterior pixels fade through shades of red with the Green value
//! (brightest at the boundary, darker far out). Files are binary P6
//! pixmaps — bit-exact, no codec involved.

use std::io::{Read, Write};
use std::path::Path;

use crate::dynamics::GreenField;
use crate::error::{Error, Result};
use crate::parallel::map_indexed;

/// Fill color of the set.
pub const INSIDE_COLOR: [u8; 3] = [0, 160, 0];
/// Boundary-band color.
pub const BOUNDARY_COLOR: [u8; 3] = [0, 0, 0];

/// Row-major 8-bit RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<RasterImage> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(
                "image needs positive width and height".into(),
            ));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::InvalidInput(format!(
                "expected {} pixel bytes for {width} x {height}, got {}",
                width * height * 3,
                pixels.len()
            )));
        }
        Ok(RasterImage { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major RGB triples, top row first.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// RGB triple at (row, col).
    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// Colorize a sampled Green field: inside pixels green, pixels whose
/// 8-neighborhood contains both inside and outside pixels black, remaining
/// outside pixels red with channel 255 exp(-g / g0), where g0 is the median
/// positive Green value of the field (so the visible dynamic range adapts
/// to the viewport).
pub fn colorize(field: &GreenField) -> Result<RasterImage> {
    let (w, h) = (field.width, field.height);
    if field.values.len() != w * h || field.inside.len() != w * h {
        return Err(Error::InvalidInput(format!(
            "field claims {w} x {h} but carries {} values and {} flags",
            field.values.len(),
            field.inside.len()
        )));
    }
    if field.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NonFinite { what: "green field value" });
    }
    let g0 = median_positive(&field.values).unwrap_or(1.0);
    let rows = map_indexed(h, |row| {
        let mut out = Vec::with_capacity(3 * w);
        for col in 0..w {
            let rgb = if boundary_pixel(field, row, col) {
                BOUNDARY_COLOR
            } else if field.inside[row * w + col] {
                INSIDE_COLOR
            } else {
                let g = field.values[row * w + col];
                [(255.0 * (-g / g0).exp()).round() as u8, 0, 0]
            };
            out.extend_from_slice(&rgb);
        }
        out
    });
    let mut pixels = Vec::with_capacity(3 * w * h);
    for row in rows {
        pixels.extend_from_slice(&row);
    }
    RasterImage::new(w, h, pixels)
}

/// True when the 3x3 neighborhood (clipped at edges) contains both inside
/// and outside pixels.
fn boundary_pixel(field: &GreenField, row: usize, col: usize) -> bool {
    let (w, h) = (field.width, field.height);
    let mut saw_inside = false;
    let mut saw_outside = false;
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            let r = row as i64 + dr;
            let c = col as i64 + dc;
            if r < 0 || c < 0 || r >= h as i64 || c >= w as i64 {
                continue;
            }
            if field.inside[r as usize * w + c as usize] {
                saw_inside = true;
            } else {
                saw_outside = true;
            }
        }
    }
    saw_inside && saw_outside
}

/// Lower median of the strictly positive values; None when there are none.
fn median_positive(values: &[f64]) -> Option<f64> {
    let mut positive: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return None;
    }
    positive.sort_by(|a, b| a.total_cmp(b));
    Some(positive[(positive.len() - 1) / 2])
}

/// Binary portable pixmap: ASCII header "P6\n<width> <height>\n255\n"
/// followed by the row-major RGB payload, top row first.
pub fn image_bytes(img: &RasterImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn write_image(img: &RasterImage, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| {
        Error::InvalidInput(format!("cannot create {}: {e}", path.display()))
    })?;
    file.write_all(&image_bytes(img)).map_err(|e| {
        Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
    })?;
    Ok(())
}

pub fn read_image(path: &Path) -> Result<RasterImage> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|e| Error::InvalidInput(format!("cannot open {}: {e}", path.display())))?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_image(&bytes)
}

fn parse_image(bytes: &[u8]) -> Result<RasterImage> {
    // Exactly the format write_image emits: three header lines, no comments.
    let mut cuts = bytes
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b == b'\n')
        .map(|(i, _)| i);
    let (l1, l2, l3) = match (cuts.next(), cuts.next(), cuts.next()) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::Parse("truncated pixmap header".into())),
    };
    let magic = &bytes[..l1];
    if magic != b"P6" {
        return Err(Error::Parse(format!(
            "expected P6 magic, got {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let dims = std::str::from_utf8(&bytes[l1 + 1..l2])
        .map_err(|_| Error::Parse("non-UTF-8 pixmap dimensions".into()))?;
    let mut parts = dims.split_whitespace();
    let width: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad pixmap dimensions {dims:?}")))?;
    let height: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad pixmap dimensions {dims:?}")))?;
    if parts.next().is_some() {
        return Err(Error::Parse(format!("bad pixmap dimensions {dims:?}")));
    }
    let depth = &bytes[l2 + 1..l3];
    if depth != b"255" {
        return Err(Error::Parse(format!(
            "expected max value 255, got {:?}",
            String::from_utf8_lossy(depth)
        )));
    }
    let payload = &bytes[l3 + 1..];
    if payload.len() != width * height * 3 {
        return Err(Error::Parse(format!(
            "expected {} payload bytes, got {}",
            width * height * 3,
            payload.len()
        )));
    }
    RasterImage::new(width, height, payload.to_vec())
}

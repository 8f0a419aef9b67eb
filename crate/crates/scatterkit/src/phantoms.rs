//! Ground-truth contrast generators: the smooth radial bump and
//! grayscale-image phantoms via a binary PGM reader.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numeric::c64;

/// Smooth compactly supported bump: `m(x) = e^{−1/(1−|x|²)}` for `|x| < 1`,
/// zero elsewhere, sampled at pixel centers. Values lie in `[0, e⁻¹]`.
pub fn bump_contrast(grid: &Grid) -> Vec<c64> {
    (0..grid.m())
        .map(|l| {
            let (x, y) = grid.center(l);
            let r2 = x * x + y * y;
            if r2 < 1.0 {
                c64::new((-1.0 / (1.0 - r2)).exp(), 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// An 8-bit grayscale raster, row-major from the top-left corner.
#[derive(Debug, Clone)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Input(format!(
                "image buffer has {} bytes, expected {}×{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// Parse a binary PGM (magic `P5`, maxval ≤ 255). Whitespace and `#` comment
/// lines in the header are handled per the format; a single whitespace byte
/// separates the header from the raster.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    let mut next_token = |bytes: &[u8]| -> Result<Vec<u8>> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Input("truncated PGM header".into()));
        }
        Ok(bytes[start..pos].to_vec())
    };

    let magic = next_token(bytes)?;
    if magic != b"P5" {
        return Err(Error::Input("not a binary PGM (missing P5 magic)".into()));
    }
    let parse_num = |tok: Vec<u8>| -> Result<usize> {
        std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Input("malformed PGM header field".into()))
    };
    let width = parse_num(next_token(bytes)?)?;
    let height = parse_num(next_token(bytes)?)?;
    let maxval = parse_num(next_token(bytes)?)?;
    if width == 0 || height == 0 {
        return Err(Error::Input("PGM with zero dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Input(format!(
            "unsupported PGM maxval {} (need 1..=255)",
            maxval
        )));
    }
    // exactly one whitespace byte after maxval, then the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Input("PGM header not followed by raster".into()));
    }
    pos += 1;
    let need = width * height;
    if bytes.len() < pos + need {
        return Err(Error::Input(format!(
            "PGM raster truncated: need {} bytes, have {}",
            need,
            bytes.len() - pos
        )));
    }
    GrayImage::new(width, height, bytes[pos..pos + need].to_vec())
}

/// Read a binary PGM file from disk.
pub fn read_pgm_file<P: AsRef<Path>>(path: P) -> Result<GrayImage> {
    let bytes = std::fs::read(path.as_ref())
        .map_err(|e| Error::Input(format!("{}: {}", path.as_ref().display(), e)))?;
    read_pgm(&bytes)
}

/// Grayscale image as a contrast: the image is stretched over the grid region
/// by nearest-neighbor resampling and each pixel contributes
/// `scale · gray/255`. Image row 0 maps to the top of the region (largest
/// second coordinate), image column 0 to the smallest first coordinate.
pub fn image_contrast(grid: &Grid, image: &GrayImage, scale: f64) -> Vec<c64> {
    let n = grid.n();
    let mut values = Vec::with_capacity(grid.m());
    for l in 0..grid.m() {
        // pixel (a1, a2) counted from the lower-left corner of the region
        let a1 = l / n;
        let a2 = l % n;
        let col = ((a1 * image.width + image.width / 2) / n).min(image.width - 1);
        let row_up = ((a2 * image.height + image.height / 2) / n).min(image.height - 1);
        let row = image.height - 1 - row_up;
        let gray = image.get(row, col) as f64 / 255.0;
        values.push(c64::new(scale * gray, 0.0));
    }
    values
}

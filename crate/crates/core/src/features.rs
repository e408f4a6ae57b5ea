//! Zoned contour features for 60x30 characters.
//!
//! The glyph contour is split into 18 non-overlapping 10x10 blocks (6 block
//! rows by 3 block columns, raster order). Each block contributes one angle
//! feature and one transit feature:
//!
//! * angle: mean angle, in degrees, of the contour pixels seen from the
//!   block's bottom-left corner. Pixel centers sit at half-integer offsets, so
//!   every angle lies strictly inside `(0, 90)`.
//! * transit: horizontal run count over vertical run count, where a run is a
//!   maximal stretch of foreground along a block row (or column).
//!
//! Blocks without contour pixels yield 0 for both. The vector holds the 18
//! angle features first, then the 18 transit features.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::BinaryImage;
use crate::segmenter::{CharacterImage, GLYPH_HEIGHT, GLYPH_WIDTH};

pub const BLOCK: usize = 10;
pub const BLOCK_ROWS: usize = GLYPH_HEIGHT / BLOCK;
pub const BLOCK_COLS: usize = GLYPH_WIDTH / BLOCK;
pub const NUM_BLOCKS: usize = BLOCK_ROWS * BLOCK_COLS;
pub const FEATURE_LEN: usize = 2 * NUM_BLOCKS;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector([f64; FEATURE_LEN]);

impl FeatureVector {
    pub fn from_parts(angle: [f64; NUM_BLOCKS], transit: [f64; NUM_BLOCKS]) -> Self {
        let mut v = [0.0; FEATURE_LEN];
        v[..NUM_BLOCKS].copy_from_slice(&angle);
        v[NUM_BLOCKS..].copy_from_slice(&transit);
        FeatureVector(v)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; FEATURE_LEN] = values.try_into().map_err(|_| {
            Error::Input(format!(
                "feature vector needs {FEATURE_LEN} values, got {}",
                values.len()
            ))
        })?;
        Ok(FeatureVector(arr))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn angle(&self) -> &[f64] {
        &self.0[..NUM_BLOCKS]
    }

    pub fn transit(&self) -> &[f64] {
        &self.0[NUM_BLOCKS..]
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_glyph_size(img: &BinaryImage) {
    assert!(
        img.width() == GLYPH_WIDTH && img.height() == GLYPH_HEIGHT,
        "feature extraction expects a {GLYPH_WIDTH}x{GLYPH_HEIGHT} glyph, got {}x{}",
        img.width(),
        img.height()
    );
}

/// Foreground pixels with a 4-neighbor that is background or off the image.
pub fn contour(glyph: &BinaryImage) -> BinaryImage {
    let (w, h) = (glyph.width(), glyph.height());
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if !glyph.get(x, y) {
                continue;
            }
            let (xi, yi) = (x as isize, y as isize);
            let edge = !glyph.get_or_bg(xi - 1, yi)
                || !glyph.get_or_bg(xi + 1, yi)
                || !glyph.get_or_bg(xi, yi - 1)
                || !glyph.get_or_bg(xi, yi + 1);
            out.set(x, y, edge);
        }
    }
    out
}

/// Visits each block as `(block index, top-left x, top-left y)` in raster order.
fn blocks() -> impl Iterator<Item = (usize, usize, usize)> {
    (0..BLOCK_ROWS).flat_map(|br| (0..BLOCK_COLS).map(move |bc| (br * BLOCK_COLS + bc, bc * BLOCK, br * BLOCK)))
}

pub fn angle_features(contour_img: &BinaryImage) -> [f64; NUM_BLOCKS] {
    check_glyph_size(contour_img);
    let mut out = [0.0; NUM_BLOCKS];
    for (b, x0, y0) in blocks() {
        let (mut sum, mut n) = (0.0, 0usize);
        for r in 0..BLOCK {
            for c in 0..BLOCK {
                if contour_img.get(x0 + c, y0 + r) {
                    let dx = c as f64 + 0.5;
                    let dy = (BLOCK - r) as f64 - 0.5;
                    sum += dy.atan2(dx).to_degrees();
                    n += 1;
                }
            }
        }
        if n > 0 {
            out[b] = sum / n as f64;
        }
    }
    out
}

fn runs(cells: impl Iterator<Item = bool>) -> usize {
    let mut count = 0;
    let mut prev = false;
    for cur in cells {
        if cur && !prev {
            count += 1;
        }
        prev = cur;
    }
    count
}

pub fn transit_features(contour_img: &BinaryImage) -> [f64; NUM_BLOCKS] {
    check_glyph_size(contour_img);
    let mut out = [0.0; NUM_BLOCKS];
    for (b, x0, y0) in blocks() {
        let horizontal: usize = (0..BLOCK)
            .map(|r| runs((0..BLOCK).map(|c| contour_img.get(x0 + c, y0 + r))))
            .sum();
        let vertical: usize = (0..BLOCK)
            .map(|c| runs((0..BLOCK).map(|r| contour_img.get(x0 + c, y0 + r))))
            .sum();
        if vertical > 0 {
            out[b] = horizontal as f64 / vertical as f64;
        }
    }
    out
}

/// Features of a raw 60x30 glyph.
pub fn extract_glyph(glyph: &BinaryImage) -> FeatureVector {
    let c = contour(glyph);
    FeatureVector::from_parts(angle_features(&c), transit_features(&c))
}

pub fn extract(ch: &CharacterImage) -> FeatureVector {
    extract_glyph(ch.glyph())
}

/// Header line of the training-set CSV format.
pub fn feature_file_header() -> String {
    let mut h = String::from("label");
    for i in 0..NUM_BLOCKS {
        write!(h, ",angle{i:02}").unwrap();
    }
    for i in 0..NUM_BLOCKS {
        write!(h, ",transit{i:02}").unwrap();
    }
    h
}

/// Writes `label,angle00..angle17,transit00..transit17` rows after a header line.
pub fn write_feature_file(path: impl AsRef<Path>, rows: &[(u32, FeatureVector)]) -> Result<()> {
    let path = path.as_ref();
    let mut out = feature_file_header();
    out.push('\n');
    for (label, v) in rows {
        write!(out, "{label}").unwrap();
        for x in v.as_slice() {
            write!(out, ",{x}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<Vec<(u32, FeatureVector)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == feature_file_header() => {}
        _ => return Err(Error::format(path, "missing or unexpected header line")),
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |msg: String| Error::format(path, format!("line {}: {msg}", n + 2));
        let mut fields = line.split(',');
        let label = fields
            .next()
            .unwrap_or("")
            .trim()
            .parse::<u32>()
            .map_err(|e| bad(format!("bad label: {e}")))?;
        let values = fields
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("bad value: {e}")))?;
        let v = FeatureVector::from_slice(&values).map_err(|e| bad(e.to_string()))?;
        rows.push((label, v));
    }
    Ok(rows)
}

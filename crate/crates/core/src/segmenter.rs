//! Character extraction from a sign crop.
//!
//! Red pixels (and a small margin around them) and everything outside the
//! inscribed circle are painted white. The remaining gray levels are split
//! with Otsu's threshold, dark pixels become foreground, and the large
//! 8-connected components that do not touch the crop border are kept as
//! characters, each normalized to 60x30.

use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::detector::SignCrop;
use crate::error::{Error, Result};
use crate::morph::{dilate, StructuringElement};
use crate::raster::{red_mask, to_gray_with, BinaryImage, GrayWeights, RedThresholds, RgbImage};
use crate::regions::{label, LabelMap};

pub const GLYPH_HEIGHT: usize = 60;
pub const GLYPH_WIDTH: usize = 30;

/// A normalized 60-row by 30-column character with at least one foreground pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterImage {
    glyph: BinaryImage,
    order_index: usize,
}

impl CharacterImage {
    pub fn new(glyph: BinaryImage, order_index: usize) -> Result<Self> {
        if glyph.width() != GLYPH_WIDTH || glyph.height() != GLYPH_HEIGHT {
            return Err(Error::Input(format!(
                "character glyph must be {GLYPH_WIDTH}x{GLYPH_HEIGHT}, got {}x{}",
                glyph.width(),
                glyph.height()
            )));
        }
        if glyph.is_empty() {
            return Err(Error::Input("character glyph has no foreground".into()));
        }
        Ok(CharacterImage { glyph, order_index })
    }

    pub fn glyph(&self) -> &BinaryImage {
        &self.glyph
    }

    pub fn order_index(&self) -> usize {
        self.order_index
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentParams {
    /// Pixels around the red mask also cleared, to swallow blurred rim edges.
    pub red_margin: usize,
    /// Keep components with at least this fraction of the largest one's area.
    pub area_frac: f64,
    /// Keep components at least this fraction of the crop height tall.
    pub min_height_frac: f64,
    /// Minimum gap between Otsu class means for any foreground to exist.
    pub min_contrast: f64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams {
            red_margin: 2,
            area_frac: 0.35,
            min_height_frac: 0.3,
            min_contrast: 48.0,
        }
    }
}

/// Otsu threshold over a histogram: returns `t` such that values `<= t` form
/// the dark class, with the gap between the two class means.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<(u8, f64)> {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return None;
    }
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0u64, 0.0f64);
    let mut best: Option<(u8, f64, f64)> = None;
    for (t, &count) in hist.iter().enumerate().take(255) {
        w0 += count;
        sum0 += t as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if best.is_none_or(|(_, b, _)| between > b) {
            best = Some((t as u8, between, m1 - m0));
        }
    }
    best.map(|(t, _, gap)| (t, gap))
}

/// Dark-on-light binarization of the sign interior with red and outside cleared.
pub fn binarize_interior(
    img: &RgbImage,
    params: &SegmentParams,
    red: &RedThresholds,
    gray: &GrayWeights,
) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut cleared = red_mask(img, red);
    if params.red_margin > 0 {
        let se = StructuringElement::square(2 * params.red_margin + 1).expect("odd size");
        cleared = dilate(&cleared, &se);
    }
    let radius = w.min(h) as f64 / 2.0;
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let g = to_gray_with(img, gray);

    let mut include = vec![false; w * h];
    let mut hist = [0u64; 256];
    for y in 0..h {
        for x in 0..w {
            let inside = (x as f64 + 0.5 - cx).hypot(y as f64 + 0.5 - cy) <= radius;
            if inside && !cleared.get(x, y) {
                include[y * w + x] = true;
                hist[g.get(x, y) as usize] += 1;
            }
        }
    }
    let mut out = BinaryImage::new(w, h);
    let Some((t, gap)) = otsu_threshold(&hist) else {
        return out;
    };
    if gap < params.min_contrast {
        return out;
    }
    for y in 0..h {
        for x in 0..w {
            if include[y * w + x] && g.get(x, y) <= t {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Nearest-neighbor resample of the foreground's tight bounding box to 60x30.
pub fn normalize_glyph(img: &BinaryImage) -> Result<BinaryImage> {
    let bbox = img
        .foreground_bbox()
        .ok_or_else(|| Error::Domain("cannot normalize an empty glyph".into()))?;
    let (bw, bh) = (bbox.width(), bbox.height());
    let mut out = BinaryImage::new(GLYPH_WIDTH, GLYPH_HEIGHT);
    for r in 0..GLYPH_HEIGHT {
        let sy = bbox.min_y + r * bh / GLYPH_HEIGHT;
        for c in 0..GLYPH_WIDTH {
            let sx = bbox.min_x + c * bw / GLYPH_WIDTH;
            out.set(c, r, img.get(sx, sy));
        }
    }
    Ok(out)
}

struct Component {
    label: u32,
    area: usize,
    bbox: BBox,
}

fn components(map: &LabelMap) -> Vec<Component> {
    let mut comps: Vec<Component> = (1..=map.count())
        .map(|label| Component {
            label,
            area: 0,
            bbox: BBox::point(usize::MAX, usize::MAX),
        })
        .collect();
    for y in 0..map.height() {
        for x in 0..map.width() {
            let l = map.get(x, y);
            if l == 0 {
                continue;
            }
            let c = &mut comps[l as usize - 1];
            if c.area == 0 {
                c.bbox = BBox::point(x, y);
            } else {
                c.bbox.include(x, y);
            }
            c.area += 1;
        }
    }
    comps
}

/// Characters of a crop image as `(source bbox within the crop, glyph)`, left to right.
pub fn segment_with_boxes(
    img: &RgbImage,
    params: &SegmentParams,
    red: &RedThresholds,
    gray: &GrayWeights,
) -> Vec<(BBox, CharacterImage)> {
    let fg = binarize_interior(img, params, red, gray);
    let map = label(&fg);
    let (w, h) = (img.width(), img.height());
    let inner: Vec<Component> = components(&map)
        .into_iter()
        .filter(|c| c.bbox.min_x > 0 && c.bbox.min_y > 0 && c.bbox.max_x + 1 < w && c.bbox.max_y + 1 < h)
        .collect();
    let Some(largest) = inner.iter().map(|c| c.area).max() else {
        return Vec::new();
    };
    let mut kept: Vec<&Component> = inner
        .iter()
        .filter(|c| {
            c.area as f64 >= params.area_frac * largest as f64
                && c.bbox.height() as f64 >= params.min_height_frac * h as f64
        })
        .collect();
    kept.sort_by_key(|c| (c.bbox.min_x, c.bbox.min_y));
    kept.iter()
        .enumerate()
        .map(|(i, c)| {
            let pixels = map.mask(c.label).crop(&c.bbox);
            let glyph = normalize_glyph(&pixels).expect("component has pixels");
            (
                c.bbox,
                CharacterImage::new(glyph, i).expect("normalized glyph is valid"),
            )
        })
        .collect()
}

pub fn segment_image(
    img: &RgbImage,
    params: &SegmentParams,
    red: &RedThresholds,
    gray: &GrayWeights,
) -> Vec<CharacterImage> {
    segment_with_boxes(img, params, red, gray)
        .into_iter()
        .map(|(_, c)| c)
        .collect()
}

pub fn segment(
    crop: &SignCrop,
    params: &SegmentParams,
    red: &RedThresholds,
    gray: &GrayWeights,
) -> Vec<CharacterImage> {
    segment_image(&crop.image, params, red, gray)
}

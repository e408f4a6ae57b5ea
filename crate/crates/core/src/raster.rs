//! Image containers and the color conversions the pipeline is built on.
//!
//! All rasters are dense and row-major. Pixel `(x, y)` lives at index
//! `y * width + x` (times three for RGB).

use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    /// Creates an image filled with `color`.
    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let data = color.iter().copied().cycle().take(width * height * 3).collect();
        RgbImage { width, height, data }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Input(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height * 3 {
            return Err(Error::Input(format!(
                "RGB buffer has {} bytes, expected {}",
                data.len(),
                width * height * 3
            )));
        }
        Ok(RgbImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: usize, y: usize, px: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&px);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    /// Copies out the sub-image covered by `bbox`. The box must lie inside the image.
    pub fn crop(&self, bbox: &BBox) -> RgbImage {
        assert!(bbox.max_x < self.width && bbox.max_y < self.height);
        let mut data = Vec::with_capacity(bbox.area() * 3);
        for y in bbox.min_y..=bbox.max_y {
            let start = (y * self.width + bbox.min_x) * 3;
            data.extend_from_slice(&self.data[start..start + bbox.width() * 3]);
        }
        RgbImage {
            width: bbox.width(),
            height: bbox.height(),
            data,
        }
    }

    pub fn bounds(&self) -> BBox {
        BBox::new(0, 0, self.width - 1, self.height - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        GrayImage {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Input(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::Input(format!(
                "gray buffer has {} bytes, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn put(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }
}

/// Foreground/background raster. Zero-sized images are allowed here since
/// crops and masks may legitimately be empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Input(format!(
                "binary buffer has {} cells, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(BinaryImage { width, height, data })
    }

    /// Builds an image from rows of `'#'` (foreground) and any other character.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut data = Vec::with_capacity(width * height);
        for row in rows {
            assert_eq!(row.chars().count(), width, "ragged ascii raster");
            data.extend(row.chars().map(|c| c == '#'));
        }
        BinaryImage { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_raw(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Like `get`, but coordinates outside the image read as background.
    #[inline]
    pub fn get_or_bg(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn complement(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| !b).collect(),
        }
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// Tight bounding box of the foreground, `None` when empty.
    pub fn foreground_bbox(&self) -> Option<BBox> {
        let mut bbox: Option<BBox> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    match bbox.as_mut() {
                        Some(b) => b.include(x, y),
                        None => bbox = Some(BBox::point(x, y)),
                    }
                }
            }
        }
        bbox
    }

    pub fn crop(&self, bbox: &BBox) -> BinaryImage {
        assert!(bbox.max_x < self.width && bbox.max_y < self.height);
        let mut out = BinaryImage::new(bbox.width(), bbox.height());
        for y in bbox.min_y..=bbox.max_y {
            for x in bbox.min_x..=bbox.max_x {
                out.set(x - bbox.min_x, y - bbox.min_y, self.get(x, y));
            }
        }
        out
    }

    /// Renders as black foreground on white, for debug dumps.
    pub fn to_rgb(&self) -> RgbImage {
        let data = self
            .data
            .iter()
            .flat_map(|&b| if b { [0u8; 3] } else { [255u8; 3] })
            .collect();
        RgbImage::from_raw(self.width, self.height, data).expect("binary image has zero size")
    }
}

/// Luma weights for RGB to gray conversion. Defaults are ITU-R BT.601.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrayWeights {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Default for GrayWeights {
    fn default() -> Self {
        GrayWeights {
            r: 0.299,
            g: 0.587,
            b: 0.114,
        }
    }
}

impl GrayWeights {
    #[inline]
    pub fn apply(&self, [r, g, b]: [u8; 3]) -> u8 {
        let v = self.r * r as f64 + self.g * g as f64 + self.b * b as f64;
        v.round().clamp(0.0, 255.0) as u8
    }
}

pub fn to_gray(img: &RgbImage) -> GrayImage {
    to_gray_with(img, &GrayWeights::default())
}

pub fn to_gray_with(img: &RgbImage, weights: &GrayWeights) -> GrayImage {
    let data = img.pixels().map(|px| weights.apply(px)).collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Hue, saturation and value, each normalized to the unit interval.
/// Hue is in `[0, 1)` with red at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Hexcone RGB to HSV. Achromatic pixels get `h = 0, s = 0`.
pub fn rgb_to_hsv([r, g, b]: [u8; 3]) -> HsvPixel {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64 / 255.0;
    if max == min {
        return HsvPixel { h: 0.0, s: 0.0, v };
    }
    let delta = (max - min) as f64;
    let s = delta / max as f64;
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let sector = if max == r {
        ((gf - bf) / delta).rem_euclid(6.0)
    } else if max == g {
        (bf - rf) / delta + 2.0
    } else {
        (rf - gf) / delta + 4.0
    };
    let mut h = sector / 6.0;
    if h >= 1.0 {
        h -= 1.0;
    }
    HsvPixel { h, s, v }
}

/// Inverse of [`rgb_to_hsv`], rounding to the nearest channel value.
pub fn hsv_to_rgb(hsv: HsvPixel) -> [u8; 3] {
    let h6 = hsv.h.rem_euclid(1.0) * 6.0;
    let c = hsv.v * hsv.s;
    let x = c * (1.0 - (h6.rem_euclid(2.0) - 1.0).abs());
    let m = hsv.v - c;
    let (r, g, b) = match h6 as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let q = |t: f64| ((t + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// Thresholds of the red-pixel rule. All comparisons are inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RedThresholds {
    pub hue_min: f64,
    pub hue_max: f64,
    pub sat_min: f64,
    pub val_min: f64,
}

impl Default for RedThresholds {
    fn default() -> Self {
        RedThresholds {
            hue_min: 0.8,
            hue_max: 0.94,
            sat_min: 0.45,
            val_min: 0.5,
        }
    }
}

impl RedThresholds {
    #[inline]
    pub fn is_red(&self, p: &HsvPixel) -> bool {
        p.s >= self.sat_min && p.v >= self.val_min && p.h >= self.hue_min && p.h <= self.hue_max
    }

    #[inline]
    pub fn is_red_rgb(&self, px: [u8; 3]) -> bool {
        self.is_red(&rgb_to_hsv(px))
    }
}

pub fn red_mask(img: &RgbImage, thresholds: &RedThresholds) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        data: img.pixels().map(|px| thresholds.is_red_rgb(px)).collect(),
    }
}

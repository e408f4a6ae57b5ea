//! Binary mathematical morphology.
//!
//! Erosion and dilation take a [`Border`] that decides how pixels outside the
//! image are read. The default, [`Border::Neutral`], reads them as foreground
//! for erosion and background for dilation; under it the usual algebra holds
//! exactly on the finite raster (duality, opening below the image, closing above it).
//! [`Border::Background`] reads everything outside as background, so erosion
//! eats the image border.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryImage;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Border {
    #[default]
    Neutral,
    Background,
}

/// Odd-sized binary mask whose origin is its center cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl StructuringElement {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(Error::InvalidParam(format!(
                "structuring element must have odd dimensions, got {width}x{height}"
            )));
        }
        if mask.len() != width * height {
            return Err(Error::InvalidParam("structuring element mask size mismatch".into()));
        }
        if !mask[(height / 2) * width + width / 2] {
            return Err(Error::InvalidParam("structuring element origin must be set".into()));
        }
        Ok(StructuringElement { width, height, mask })
    }

    /// Full `size x size` box.
    pub fn square(size: usize) -> Result<Self> {
        Self::new(size, size, vec![true; size * size])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Point reflection through the origin.
    pub fn reflect(&self) -> Self {
        let mut mask = self.mask.clone();
        mask.reverse();
        StructuringElement {
            width: self.width,
            height: self.height,
            mask,
        }
    }

    /// Offsets `(dx, dy)` of the set cells relative to the origin.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let (cx, cy) = ((self.width / 2) as isize, (self.height / 2) as isize);
        let mut v = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.mask[y * self.width + x] {
                    v.push((x as isize - cx, y as isize - cy));
                }
            }
        }
        v
    }
}

fn read(img: &BinaryImage, x: isize, y: isize, outside: bool) -> bool {
    if x < 0 || y < 0 || x >= img.width() as isize || y >= img.height() as isize {
        outside
    } else {
        img.get(x as usize, y as usize)
    }
}

pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    erode_with(img, se, Border::default())
}

/// Output pixel is set iff every SE cell, centered there, lands on foreground.
pub fn erode_with(img: &BinaryImage, se: &StructuringElement, border: Border) -> BinaryImage {
    let outside = border == Border::Neutral;
    let offsets = se.offsets();
    let mut out = BinaryImage::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (xi, yi) = (x as isize, y as isize);
            if offsets.iter().all(|&(dx, dy)| read(img, xi + dx, yi + dy, outside)) {
                out.set(x, y, true);
            }
        }
    }
    out
}

pub fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    dilate_with(img, se, Border::default())
}

/// Output pixel is set iff the reflected SE centered there hits foreground.
/// Both border modes read outside pixels as background here.
pub fn dilate_with(img: &BinaryImage, se: &StructuringElement, _border: Border) -> BinaryImage {
    let offsets = se.offsets();
    let mut out = BinaryImage::new(img.width(), img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (xi, yi) = (x as isize, y as isize);
            if offsets.iter().any(|&(dx, dy)| read(img, xi - dx, yi - dy, false)) {
                out.set(x, y, true);
            }
        }
    }
    out
}

pub fn open(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    dilate(&erode(img, se), se)
}

pub fn close(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    erode(&dilate(img, se), se)
}

/// Background pixels that cannot reach the image border through 4-connected
/// background become foreground.
pub fn fill_holes(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed = |x: usize, y: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<(usize, usize)>| {
        if !img.get(x, y) && !outside[y * w + x] {
            outside[y * w + x] = true;
            queue.push_back((x, y));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut outside, &mut queue);
        if h > 1 {
            seed(x, h - 1, &mut outside, &mut queue);
        }
    }
    for y in 0..h {
        seed(0, y, &mut outside, &mut queue);
        if w > 1 {
            seed(w - 1, y, &mut outside, &mut queue);
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let mut visit = |nx: usize, ny: usize| {
            let i = ny * w + nx;
            if !img.get(nx, ny) && !outside[i] {
                outside[i] = true;
                queue.push_back((nx, ny));
            }
        };
        if x > 0 {
            visit(x - 1, y);
        }
        if x + 1 < w {
            visit(x + 1, y);
        }
        if y > 0 {
            visit(x, y - 1);
        }
        if y + 1 < h {
            visit(x, y + 1);
        }
    }
    let data = outside.into_iter().map(|o| !o).collect();
    BinaryImage::from_raw(w, h, data).expect("same dimensions")
}

/// One step of the edge-map cleanup sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphOp {
    Erode,
    Dilate,
}

pub fn apply_sequence(img: &BinaryImage, ops: &[MorphOp], se: &StructuringElement) -> BinaryImage {
    ops.iter().fold(img.clone(), |acc, op| match op {
        MorphOp::Erode => erode(&acc, se),
        MorphOp::Dilate => dilate(&acc, se),
    })
}

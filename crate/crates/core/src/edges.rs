//! Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
//! suppression over four direction bins, and hysteresis over 8-neighbors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryImage, GrayImage};

/// How the hysteresis thresholds are interpreted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// Gradient magnitudes, in Sobel units.
    Absolute,
    /// Fractions of the largest gradient magnitude in the image.
    #[default]
    Relative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CannyParams {
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
    pub mode: ThresholdMode,
}

impl Default for CannyParams {
    fn default() -> Self {
        CannyParams {
            sigma: 2.0,
            low: 0.1,
            high: 0.3,
            mode: ThresholdMode::Relative,
        }
    }
}

impl CannyParams {
    pub fn absolute(sigma: f64, low: f64, high: f64) -> Self {
        CannyParams {
            sigma,
            low,
            high,
            mode: ThresholdMode::Absolute,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParam(format!(
                "canny sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.low > 0.0 && self.low < self.high) {
            return Err(Error::InvalidParam(format!(
                "canny thresholds need 0 < low < high, got low={} high={}",
                self.low, self.high
            )));
        }
        if self.mode == ThresholdMode::Relative && self.high > 1.0 {
            return Err(Error::InvalidParam(format!(
                "relative canny high threshold must be <= 1, got {}",
                self.high
            )));
        }
        Ok(())
    }
}

/// Normalized 1-D Gaussian kernel with radius `ceil(3 sigma)`.
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable convolution with clamp-to-edge borders.
pub(crate) fn convolve_separable(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                acc += w * row[clamp(x as isize + k as isize - r, width)];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                acc += w * tmp[clamp(y as isize + k as isize - r, height) * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

pub fn canny(img: &GrayImage, params: &CannyParams) -> Result<BinaryImage> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::Dimension {
            width: w,
            height: h,
            min: 3,
        });
    }

    let src: Vec<f64> = img.as_raw().iter().map(|&v| v as f64).collect();
    let smooth = convolve_separable(&src, w, h, &gaussian_kernel(params.sigma));

    let at = |x: isize, y: isize| smooth[y.clamp(0, h as isize - 1) as usize * w + x.clamp(0, w as isize - 1) as usize];
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let dx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let dy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            gx[i] = dx;
            gy[i] = dy;
            mag[i] = dx.hypot(dy);
        }
    }

    let thinned = non_maximum_suppression(&mag, &gx, &gy, w, h);

    let (low, high) = match params.mode {
        ThresholdMode::Absolute => (params.low, params.high),
        ThresholdMode::Relative => {
            let max = mag.iter().cloned().fold(0.0, f64::max);
            (params.low * max, params.high * max)
        }
    };
    Ok(hysteresis(&thinned, w, h, low, high))
}

/// Keeps pixels that are maxima along the quantized gradient direction.
/// Ties are broken toward the forward neighbor so a symmetric ridge stays one pixel wide.
fn non_maximum_suppression(mag: &[f64], gx: &[f64], gy: &[f64], w: usize, h: usize) -> Vec<f64> {
    let get = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            // Offset toward the forward neighbor along the gradient (y points down).
            let (dx, dy) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let back = get(xi - dx, yi - dy);
            let fwd = get(xi + dx, yi + dy);
            if m >= back && m > fwd {
                out[i] = m;
            }
        }
    }
    out
}

fn hysteresis(thinned: &[f64], w: usize, h: usize, low: f64, high: f64) -> BinaryImage {
    let mut out = BinaryImage::new(w, h);
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let m = thinned[y * w + x];
            if m > 0.0 && m >= high && !out.get(x, y) {
                out.set(x, y, true);
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for ny in cy.saturating_sub(1)..=(cy + 1).min(h - 1) {
                        for nx in cx.saturating_sub(1)..=(cx + 1).min(w - 1) {
                            let nm = thinned[ny * w + nx];
                            if nm > 0.0 && nm >= low && !out.get(nx, ny) {
                                out.set(nx, ny, true);
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

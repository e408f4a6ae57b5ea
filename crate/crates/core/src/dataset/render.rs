//! Scene rendering: a light background with one speed sign on it.
//!
//! The sign is a white disk inside a red rim of thickness `0.15 * radius`,
//! with the speed's digits drawn in black from the built-in font. Digits are
//! `0.7 * radius` tall and separated by one and a half font cells. Rotation
//! turns the digit block about the sign center. Blur and then per-channel
//! Gaussian noise are applied to the whole image.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::font::{digit_glyph, ink_columns, FONT_ROWS};
use crate::bbox::BBox;
use crate::edges::{convolve_separable, gaussian_kernel};
use crate::error::{Error, Result};
use crate::raster::{hsv_to_rgb, HsvPixel, RedThresholds, RgbImage};

pub const SPEEDS: [u32; 5] = [20, 40, 60, 80, 100];
pub const RIM_FRACTION: f64 = 0.15;
pub const DIGIT_HEIGHT_FRACTION: f64 = 0.7;
/// Space between digits, in font cells.
pub const DIGIT_GAP_CELLS: f64 = 1.5;
pub const MAX_ROTATION: f64 = 10.0;

const WHITE: [u8; 3] = [255, 255, 255];
const INK: [u8; 3] = [0, 0, 0];

pub fn default_rim_color() -> [u8; 3] {
    hsv_to_rgb(HsvPixel {
        h: 0.9,
        s: 0.95,
        v: 0.65,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    Plain,
    Gradient,
    Clutter,
}

impl fmt::Display for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Background::Plain => "plain",
            Background::Gradient => "gradient",
            Background::Clutter => "clutter",
        })
    }
}

impl FromStr for Background {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Background::Plain),
            "gradient" => Ok(Background::Gradient),
            "clutter" => Ok(Background::Clutter),
            _ => Err(Error::InvalidParam(format!(
                "unknown background {s:?} (expected plain, gradient or clutter)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignSpec {
    pub speed: u32,
    /// Center in pixel coordinates, where pixel `(x, y)` covers `[x, x+1) x [y, y+1)`.
    pub center: (f64, f64),
    pub radius: f64,
    pub rim_color: [u8; 3],
    /// Degrees, counterclockwise.
    pub rotation: f64,
    pub noise_sigma: f64,
    pub blur_sigma: f64,
}

impl SignSpec {
    pub fn new(speed: u32, center: (f64, f64), radius: f64) -> Self {
        SignSpec {
            speed,
            center,
            radius,
            rim_color: default_rim_color(),
            rotation: 0.0,
            noise_sigma: 0.0,
            blur_sigma: 0.0,
        }
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if !SPEEDS.contains(&self.speed) {
            return Err(Error::Spec(format!("speed {} is not one of {SPEEDS:?}", self.speed)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Spec(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.rotation.abs() <= MAX_ROTATION) {
            return Err(Error::Spec(format!(
                "rotation must be within +-{MAX_ROTATION} degrees, got {}",
                self.rotation
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.blur_sigma >= 0.0) {
            return Err(Error::Spec("noise and blur sigmas must be >= 0".into()));
        }
        if !RedThresholds::default().is_red_rgb(self.rim_color) {
            return Err(Error::Spec(format!("rim color {:?} is not red", self.rim_color)));
        }
        let (cx, cy) = self.center;
        let r = self.radius;
        if cx - r < 0.0 || cy - r < 0.0 || cx + r > width as f64 || cy + r > height as f64 {
            return Err(Error::Spec(format!(
                "sign at ({cx}, {cy}) with radius {r} does not fit in {width}x{height}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DigitAnnotation {
    pub digit: u32,
    pub bbox: BBox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignAnnotation {
    pub speed: u32,
    pub bbox: BBox,
    pub center: [f64; 2],
    pub radius: f64,
    /// Left to right.
    pub digits: Vec<DigitAnnotation>,
}

/// Ground truth for one image. `path` is relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<u32>,
    pub width: usize,
    pub height: usize,
    pub signs: Vec<SignAnnotation>,
}

fn light_color(rng: &mut ChaCha8Rng) -> [u8; 3] {
    hsv_to_rgb(HsvPixel {
        h: rng.random_range(0.15..0.65),
        s: rng.random_range(0.05..0.35),
        v: rng.random_range(0.85..0.98),
    })
}

fn paint_background(img: &mut RgbImage, background: Background, rng: &mut ChaCha8Rng) {
    let (w, h) = (img.width(), img.height());
    match background {
        Background::Plain => {
            let c = light_color(rng);
            *img = RgbImage::filled(w, h, c);
        }
        Background::Gradient => {
            let (c0, c1) = (light_color(rng), light_color(rng));
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (dx, dy) = (phi.cos(), phi.sin());
            let corners = [(0.0, 0.0), (w as f64, 0.0), (0.0, h as f64), (w as f64, h as f64)];
            let proj = |x: f64, y: f64| x * dx + y * dy;
            let lo = corners.iter().map(|&(x, y)| proj(x, y)).fold(f64::INFINITY, f64::min);
            let hi = corners
                .iter()
                .map(|&(x, y)| proj(x, y))
                .fold(f64::NEG_INFINITY, f64::max);
            for y in 0..h {
                for x in 0..w {
                    let t = (proj(x as f64 + 0.5, y as f64 + 0.5) - lo) / (hi - lo);
                    let mix = |a: u8, b: u8| (a as f64 + t * (b as f64 - a as f64)).round() as u8;
                    img.put(x, y, [mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2])]);
                }
            }
        }
        Background::Clutter => {
            let base = light_color(rng);
            *img = RgbImage::filled(w, h, base);
            let shapes = rng.random_range(4..=10);
            for _ in 0..shapes {
                let color = hsv_to_rgb(HsvPixel {
                    h: rng.random_range(0.15..0.65),
                    s: rng.random_range(0.1..0.6),
                    v: rng.random_range(0.3..0.95),
                });
                let ellipse = rng.random_bool(0.5);
                let (sw, sh) = (rng.random_range(10.0..80.0), rng.random_range(10.0..80.0));
                let (cx, cy) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
                for y in 0..h {
                    for x in 0..w {
                        let u = (x as f64 + 0.5 - cx) / (sw / 2.0);
                        let v = (y as f64 + 0.5 - cy) / (sh / 2.0);
                        let inside = if ellipse {
                            u * u + v * v <= 1.0
                        } else {
                            u.abs() <= 1.0 && v.abs() <= 1.0
                        };
                        if inside {
                            img.put(x, y, color);
                        }
                    }
                }
            }
        }
    }
}

/// Horizontal layout of the digit block: `(digit, first ink column, left edge)`
/// in font cells, with the total width.
fn layout(speed: u32) -> (Vec<(u32, usize, f64)>, f64) {
    let mut x = 0.0;
    let mut out = Vec::new();
    for (i, ch) in speed.to_string().chars().enumerate() {
        let d = ch.to_digit(10).expect("decimal digit");
        let (first, last) = ink_columns(d).expect("digit in range");
        if i > 0 {
            x += DIGIT_GAP_CELLS;
        }
        out.push((d, first, x));
        x += (last - first + 1) as f64;
    }
    (out, x)
}

/// Renders one sign on the chosen background. Deterministic in all arguments.
pub fn render_scene(
    spec: &SignSpec,
    background: Background,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<(RgbImage, Annotation)> {
    if width == 0 || height == 0 {
        return Err(Error::Spec("image must be non-empty".into()));
    }
    spec.validate(width, height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = RgbImage::filled(width, height, WHITE);
    paint_background(&mut img, background, &mut rng);

    let (cx, cy) = spec.center;
    let r = spec.radius;
    let inner = (1.0 - RIM_FRACTION) * r;
    let cell = DIGIT_HEIGHT_FRACTION * r / FONT_ROWS as f64;
    let (digits, block_cells) = layout(spec.speed);
    let glyphs: Vec<_> = digits.iter().map(|&(d, _, _)| digit_glyph(d).expect("digit")).collect();
    let block_w = block_cells * cell;
    let block_h = FONT_ROWS as f64 * cell;
    let (sin, cos) = spec.rotation.to_radians().sin_cos();

    let mut sign_box: Option<BBox> = None;
    let mut digit_boxes: Vec<Option<BBox>> = vec![None; digits.len()];
    let grow = |b: &mut Option<BBox>, x: usize, y: usize| match b {
        Some(b) => b.include(x, y),
        None => *b = Some(BBox::point(x, y)),
    };

    let x0 = (cx - r).floor().max(0.0) as usize;
    let y0 = (cy - r).floor().max(0.0) as usize;
    let x1 = ((cx + r).ceil() as usize).min(width);
    let y1 = ((cy + r).ceil() as usize).min(height);
    for y in y0..y1 {
        for x in x0..x1 {
            let u = x as f64 + 0.5 - cx;
            let v = y as f64 + 0.5 - cy;
            let d = u.hypot(v);
            if d > r {
                continue;
            }
            grow(&mut sign_box, x, y);
            if d > inner {
                img.put(x, y, spec.rim_color);
                continue;
            }
            // Image y points down, so a counterclockwise turn of the content
            // is undone by rotating the sample point clockwise on screen.
            let tu = u * cos - v * sin;
            let tv = u * sin + v * cos;
            let tx = tu + block_w / 2.0;
            let ty = tv + block_h / 2.0;
            let mut color = WHITE;
            if tx >= 0.0 && ty >= 0.0 && ty < block_h {
                let row = (ty / cell) as usize;
                let cx_cells = tx / cell;
                for (k, &(_, first, left)) in digits.iter().enumerate() {
                    let offset = cx_cells - left;
                    if offset < 0.0 {
                        break;
                    }
                    let col = first + offset as usize;
                    if col < glyphs[k].width() && glyphs[k].get(col, row) {
                        color = INK;
                        grow(&mut digit_boxes[k], x, y);
                        break;
                    }
                }
            }
            img.put(x, y, color);
        }
    }

    if spec.blur_sigma > 0.0 {
        blur(&mut img, spec.blur_sigma);
    }
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).expect("valid sigma");
        let mut data = img.into_raw();
        for v in data.iter_mut() {
            *v = (*v as f64 + normal.sample(&mut rng)).round().clamp(0.0, 255.0) as u8;
        }
        img = RgbImage::from_raw(width, height, data)?;
    }

    let digit_annotations = digits
        .iter()
        .zip(digit_boxes)
        .map(|(&(digit, _, _), b)| {
            b.map(|bbox| DigitAnnotation { digit, bbox })
                .ok_or_else(|| Error::Spec(format!("radius {r} too small to draw digit {digit}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let annotation = Annotation {
        path: String::new(),
        class: Some(spec.speed),
        width,
        height,
        signs: vec![SignAnnotation {
            speed: spec.speed,
            bbox: sign_box.expect("validated sign covers pixels"),
            center: [cx, cy],
            radius: r,
            digits: digit_annotations,
        }],
    };
    Ok((img, annotation))
}

fn blur(img: &mut RgbImage, sigma: f64) {
    let (w, h) = (img.width(), img.height());
    let kernel = gaussian_kernel(sigma);
    let mut data = img.as_raw().to_vec();
    for ch in 0..3 {
        let plane: Vec<f64> = data.iter().skip(ch).step_by(3).map(|&v| v as f64).collect();
        let out = convolve_separable(&plane, w, h, &kernel);
        for (i, v) in out.into_iter().enumerate() {
            data[3 * i + ch] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    *img = RgbImage::from_raw(w, h, data).expect("same size");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::red_mask;

    #[test]
    fn default_rim_is_red() {
        assert!(RedThresholds::default().is_red_rgb(default_rim_color()));
    }

    #[test]
    fn sixty_sign_geometry() {
        let spec = SignSpec::new(60, (100.0, 80.0), 50.0);
        let (img, ann) = render_scene(&spec, Background::Plain, 200, 160, 3).unwrap();
        let sign = &ann.signs[0];
        assert_eq!(sign.bbox, BBox::new(50, 30, 149, 129));

        // Annulus pixels, counted directly.
        let mask = red_mask(&img, &RedThresholds::default());
        let (mut band, mut red) = (0, 0);
        for y in 0..160 {
            for x in 0..200 {
                let d = (x as f64 + 0.5 - 100.0).hypot(y as f64 + 0.5 - 80.0);
                if d > 0.85 * 50.0 && d <= 50.0 {
                    band += 1;
                    red += mask.get(x, y) as usize;
                }
            }
        }
        assert!(red as f64 / band as f64 >= 0.95);

        assert_eq!(sign.digits.len(), 2);
        assert_eq!((sign.digits[0].digit, sign.digits[1].digit), (6, 0));
        assert!(!sign.digits[0].bbox.intersects(&sign.digits[1].bbox));
        assert!(sign.digits[0].bbox.max_x < sign.digits[1].bbox.min_x);
        for dg in &sign.digits {
            assert_eq!(dg.bbox.intersection(&sign.bbox), Some(dg.bbox));
        }
    }

    #[test]
    fn deterministic() {
        let mut spec = SignSpec::new(100, (80.0, 70.0), 40.0);
        spec.noise_sigma = 5.0;
        spec.blur_sigma = 1.0;
        spec.rotation = 4.0;
        let a = render_scene(&spec, Background::Clutter, 160, 140, 11).unwrap();
        let b = render_scene(&spec, Background::Clutter, 160, 140, 11).unwrap();
        assert_eq!(a, b);
        let c = render_scene(&spec, Background::Clutter, 160, 140, 12).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn spec_errors() {
        let spec = SignSpec::new(60, (50.0, 50.0), 60.0);
        assert!(matches!(
            render_scene(&spec, Background::Plain, 100, 100, 0),
            Err(Error::Spec(_))
        ));
        let spec = SignSpec::new(50, (50.0, 50.0), 20.0);
        assert!(render_scene(&spec, Background::Plain, 100, 100, 0).is_err());
        let mut spec = SignSpec::new(60, (50.0, 50.0), 20.0);
        spec.rim_color = [0, 0, 255];
        assert!(render_scene(&spec, Background::Plain, 100, 100, 0).is_err());
        spec.rim_color = default_rim_color();
        spec.rotation = 12.0;
        assert!(render_scene(&spec, Background::Plain, 100, 100, 0).is_err());
    }

    #[test]
    fn ink_is_black_and_digits_spell_speed() {
        for speed in SPEEDS {
            let spec = SignSpec::new(speed, (90.0, 90.0), 70.0);
            let (img, ann) = render_scene(&spec, Background::Gradient, 180, 180, 1).unwrap();
            let spelled: String = ann.signs[0].digits.iter().map(|d| d.digit.to_string()).collect();
            assert_eq!(spelled, speed.to_string());
            let b = ann.signs[0].digits[0].bbox;
            let inked = (b.min_y..=b.max_y)
                .flat_map(|y| (b.min_x..=b.max_x).map(move |x| (x, y)))
                .any(|(x, y)| img.get(x, y) == INK);
            assert!(inked);
        }
    }

    #[test]
    fn background_names() {
        for b in [Background::Plain, Background::Gradient, Background::Clutter] {
            assert_eq!(b.to_string().parse::<Background>().unwrap(), b);
        }
        assert!("noise".parse::<Background>().is_err());
    }
}

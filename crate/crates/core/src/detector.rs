//! Sign detection: gray conversion, edge map, closing to join edge gaps, hole
//! filling, opening to strip boundary spurs, labeling, circularity band, and a
//! red-rim check on each candidate.

use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::edges::{canny, CannyParams};
use crate::error::{Error, Result};
use crate::morph::{apply_sequence, fill_holes, MorphOp, StructuringElement};
use crate::raster::{red_mask, to_gray_with, BinaryImage, GrayWeights, RedThresholds, RgbImage};
use crate::regions::{label, region_props, Region};

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionParams {
    pub gray: GrayWeights,
    pub canny: CannyParams,
    pub red: RedThresholds,
    /// Side of the square structuring element.
    pub se_size: usize,
    /// Morphology applied to the edge map, in order.
    pub morph_ops: Vec<MorphOp>,
    /// Morphology applied to the hole-filled map, in order.
    pub fill_ops: Vec<MorphOp>,
    pub metric_low: f64,
    pub metric_high: f64,
    /// Minimum fraction of rim-band pixels that must be red.
    pub red_ratio_min: f64,
    /// Rim band, as fractions of the crop's inscribed radius.
    pub rim_inner: f64,
    pub rim_outer: f64,
    pub min_area: usize,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            gray: GrayWeights::default(),
            canny: CannyParams::default(),
            red: RedThresholds::default(),
            se_size: 3,
            morph_ops: vec![MorphOp::Dilate, MorphOp::Erode],
            fill_ops: vec![MorphOp::Erode, MorphOp::Dilate],
            metric_low: 0.9,
            metric_high: 1.0,
            red_ratio_min: 0.3,
            rim_inner: 0.6,
            rim_outer: 1.0,
            min_area: 400,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        self.canny.validate()?;
        if !(self.metric_low > 0.0 && self.metric_low <= self.metric_high) {
            return Err(Error::InvalidParam(format!(
                "need 0 < metric_low <= metric_high, got [{}, {}]",
                self.metric_low, self.metric_high
            )));
        }
        if !(self.red_ratio_min > 0.0 && self.red_ratio_min <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "red_ratio_min must be in (0, 1], got {}",
                self.red_ratio_min
            )));
        }
        if !(self.rim_inner >= 0.0 && self.rim_inner < self.rim_outer) {
            return Err(Error::InvalidParam(format!(
                "rim band needs 0 <= inner < outer, got [{}, {}]",
                self.rim_inner, self.rim_outer
            )));
        }
        StructuringElement::square(self.se_size)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignCrop {
    pub image: RgbImage,
    pub bbox: BBox,
    /// Pixel area of the filled component.
    pub area: usize,
    pub metric: f64,
    pub red_fraction: f64,
}

/// Why a labeled component was or was not reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TooSmall,
    OutsideBand,
    NoRedRim,
    Overlapped,
    Accepted,
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub region: Region,
    pub red_fraction: Option<f64>,
    pub verdict: Verdict,
}

/// Every stage of one detection run, for inspection.
#[derive(Clone, Debug)]
pub struct DetectionTrace {
    pub edges: BinaryImage,
    pub cleaned: BinaryImage,
    pub filled: BinaryImage,
    pub candidates: Vec<Candidate>,
    pub crops: Vec<SignCrop>,
}

/// Fraction of red pixels within the rim band of a crop, `None` if the band is empty.
pub fn rim_red_fraction(crop: &RgbImage, params: &DetectionParams) -> Option<f64> {
    let (w, h) = (crop.width() as f64, crop.height() as f64);
    let radius = w.min(h) / 2.0;
    let (cx, cy) = (w / 2.0, h / 2.0);
    let (lo, hi) = (params.rim_inner * radius, params.rim_outer * radius);
    let mask = red_mask(crop, &params.red);
    let (mut band, mut red) = (0usize, 0usize);
    for y in 0..crop.height() {
        for x in 0..crop.width() {
            let d = (x as f64 + 0.5 - cx).hypot(y as f64 + 0.5 - cy);
            if d >= lo && d <= hi {
                band += 1;
                if mask.get(x, y) {
                    red += 1;
                }
            }
        }
    }
    (band > 0).then(|| red as f64 / band as f64)
}

/// Checks the annulus between `rim_inner` and `rim_outer` times the inscribed
/// radius for red pixels.
pub fn check_red_rim(crop: &RgbImage, params: &DetectionParams) -> (bool, f64) {
    match rim_red_fraction(crop, params) {
        Some(f) => (f >= params.red_ratio_min, f),
        None => (false, 0.0),
    }
}

pub fn detect(img: &RgbImage, params: &DetectionParams) -> Result<Vec<SignCrop>> {
    Ok(detect_traced(img, params)?.crops)
}

pub fn detect_traced(img: &RgbImage, params: &DetectionParams) -> Result<DetectionTrace> {
    params.validate()?;
    let gray = to_gray_with(img, &params.gray);
    let edges = canny(&gray, &params.canny)?;
    let se = StructuringElement::square(params.se_size)?;
    let cleaned = apply_sequence(&edges, &params.morph_ops, &se);
    let filled = apply_sequence(&fill_holes(&cleaned), &params.fill_ops, &se);
    let labels = label(&filled);

    let mut candidates: Vec<Candidate> = region_props(&labels)
        .into_iter()
        .map(|region| {
            let mut c = Candidate {
                region,
                red_fraction: None,
                verdict: Verdict::Accepted,
            };
            if c.region.area < params.min_area {
                c.verdict = Verdict::TooSmall;
            } else if c.region.metric < params.metric_low || c.region.metric > params.metric_high {
                c.verdict = Verdict::OutsideBand;
            } else {
                let (passes, fraction) = check_red_rim(&img.crop(&c.region.bbox), params);
                c.red_fraction = Some(fraction);
                if !passes {
                    c.verdict = Verdict::NoRedRim;
                }
            }
            c
        })
        .collect();

    // Among overlapping survivors keep the one closest to a perfect circle.
    let mut order: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].verdict == Verdict::Accepted)
        .collect();
    order.sort_by(|&a, &b| {
        let da = (candidates[a].region.metric - 1.0).abs();
        let db = (candidates[b].region.metric - 1.0).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept
            .iter()
            .any(|&k| candidates[k].region.bbox.intersects(&candidates[i].region.bbox))
        {
            candidates[i].verdict = Verdict::Overlapped;
        } else {
            kept.push(i);
        }
    }

    let mut crops: Vec<SignCrop> = kept
        .iter()
        .map(|&i| {
            let c = &candidates[i];
            SignCrop {
                image: img.crop(&c.region.bbox),
                bbox: c.region.bbox,
                area: c.region.area,
                metric: c.region.metric,
                red_fraction: c.red_fraction.expect("accepted candidates were rim-checked"),
            }
        })
        .collect();
    crops.sort_by(|a, b| {
        b.area
            .cmp(&a.area)
            .then(a.bbox.min_y.cmp(&b.bbox.min_y))
            .then(a.bbox.min_x.cmp(&b.bbox.min_x))
    });

    Ok(DetectionTrace {
        edges,
        cleaned,
        filled,
        candidates,
        crops,
    })
}

//! Corpus evaluation: detection and recognition rates, false positives, and
//! accuracy by sign radius.
//!
//! Detections are matched to ground-truth signs greedily by descending IoU,
//! each side used at most once, requiring IoU at or above the threshold.
//! Recognition is scored on matched signs only.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::config::EvalParams;
use crate::dataset::Annotation;
use crate::error::{Error, Result};
use crate::recognize::{load_entry_image, Recognizer};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignRecord {
    pub speed: u32,
    pub radius: f64,
    pub bbox: BBox,
    /// Matched detection's bbox.
    pub detection: Option<BBox>,
    pub iou: f64,
    /// Text read from the matched detection.
    pub predicted: Option<String>,
}

impl SignRecord {
    pub fn matched(&self) -> bool {
        self.detection.is_some()
    }

    pub fn correct(&self) -> bool {
        self.predicted.as_deref() == Some(self.speed.to_string().as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub path: String,
    pub detections: usize,
    pub false_positives: usize,
    pub signs: Vec<SignRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub radius_min: f64,
    pub radius_max: f64,
    pub signs: usize,
    pub detected: usize,
    pub recognized: usize,
    pub detection_rate: f64,
    pub recognition_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub images: usize,
    pub signs: usize,
    pub detected: usize,
    pub recognized: usize,
    pub false_positives: usize,
    pub detection_rate: f64,
    pub false_positives_per_image: f64,
    pub recognition_rate: f64,
    pub buckets: Vec<BucketRow>,
    pub records: Vec<ImageRecord>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Greedy one-to-one matching; returns `(detection, truth, iou)` triples.
pub fn match_boxes(detections: &[BBox], truths: &[BBox], threshold: f64) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(usize, usize, f64)> = detections
        .iter()
        .enumerate()
        .flat_map(|(i, d)| truths.iter().enumerate().map(move |(j, t)| (i, j, d.iou(t))))
        .filter(|&(_, _, iou)| iou >= threshold)
        .collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut used_d = vec![false; detections.len()];
    let mut used_t = vec![false; truths.len()];
    let mut out = Vec::new();
    for (i, j, iou) in pairs {
        if !used_d[i] && !used_t[j] {
            used_d[i] = true;
            used_t[j] = true;
            out.push((i, j, iou));
        }
    }
    out
}

/// Bucket index of a radius: `[e_k, e_k+1)`, with the last bucket closed.
pub fn bucket_of(radius: f64, edges: &[f64]) -> Option<usize> {
    let n = edges.len().checked_sub(1)?;
    (0..n).find(|&k| radius >= edges[k] && (radius < edges[k + 1] || (k + 1 == n && radius == edges[n])))
}

/// Aggregates per-image records into a report.
pub fn summarize(records: Vec<ImageRecord>, params: &EvalParams) -> EvalReport {
    let signs: Vec<&SignRecord> = records.iter().flat_map(|r| &r.signs).collect();
    let detected = signs.iter().filter(|s| s.matched()).count();
    let recognized = signs.iter().filter(|s| s.matched() && s.correct()).count();
    let false_positives = records.iter().map(|r| r.false_positives).sum();
    let edges = &params.radius_edges;
    let buckets = (0..edges.len().saturating_sub(1))
        .map(|k| {
            let members: Vec<&&SignRecord> = signs.iter().filter(|s| bucket_of(s.radius, edges) == Some(k)).collect();
            let det = members.iter().filter(|s| s.matched()).count();
            let rec = members.iter().filter(|s| s.matched() && s.correct()).count();
            BucketRow {
                radius_min: edges[k],
                radius_max: edges[k + 1],
                signs: members.len(),
                detected: det,
                recognized: rec,
                detection_rate: ratio(det, members.len()),
                recognition_rate: ratio(rec, det),
            }
        })
        .collect();
    EvalReport {
        images: records.len(),
        signs: signs.len(),
        detected,
        recognized,
        false_positives,
        detection_rate: ratio(detected, signs.len()),
        false_positives_per_image: ratio(false_positives, records.len()),
        recognition_rate: ratio(recognized, detected),
        buckets,
        records,
    }
}

pub fn evaluate_image(
    entry: &Annotation,
    img: &crate::raster::RgbImage,
    recognizer: &Recognizer,
    params: &EvalParams,
) -> Result<ImageRecord> {
    let found = recognizer.recognize(img)?;
    let det_boxes: Vec<BBox> = found.iter().map(|f| f.crop.bbox).collect();
    let truth_boxes: Vec<BBox> = entry.signs.iter().map(|s| s.bbox).collect();
    let matches = match_boxes(&det_boxes, &truth_boxes, params.iou_threshold);
    let mut signs: Vec<SignRecord> = entry
        .signs
        .iter()
        .map(|s| SignRecord {
            speed: s.speed,
            radius: s.radius,
            bbox: s.bbox,
            detection: None,
            iou: 0.0,
            predicted: None,
        })
        .collect();
    for &(i, j, iou) in &matches {
        signs[j].detection = Some(det_boxes[i]);
        signs[j].iou = iou;
        signs[j].predicted = Some(found[i].reading.text.clone());
    }
    Ok(ImageRecord {
        path: entry.path.clone(),
        detections: found.len(),
        false_positives: found.len() - matches.len(),
        signs,
    })
}

/// Evaluates every manifest entry; records keep manifest order.
pub fn evaluate(
    manifest_path: &Path,
    entries: &[Annotation],
    recognizer: &Recognizer,
    params: &EvalParams,
) -> Result<EvalReport> {
    params.validate()?;
    if entries.is_empty() {
        return Err(Error::Input(format!(
            "manifest {} has no entries",
            manifest_path.display()
        )));
    }
    let records = entries
        .par_iter()
        .map(|entry| {
            let img = load_entry_image(manifest_path, entry)?;
            evaluate_image(entry, &img, recognizer, params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(records, params))
}

//! End-to-end reading of speed signs, and training-set assembly.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::config::Config;
use crate::dataset::{resolve_image_path, scaled_glyph, Annotation, SPEEDS};
use crate::detector::{detect, DetectionParams, SignCrop};
use crate::error::{Error, Result};
use crate::features::{extract, extract_glyph, FeatureVector};
use crate::io::read_image;
use crate::raster::RgbImage;
use crate::segmenter::{normalize_glyph, segment_image, SegmentParams};
use crate::svm::MulticlassModel;

#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline {
    pub detection: DetectionParams,
    pub segment: SegmentParams,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline::from_config(&Config::default())
    }
}

impl Pipeline {
    pub fn from_config(cfg: &Config) -> Self {
        Pipeline {
            detection: cfg.detection_params(),
            segment: cfg.segmenter,
        }
    }

    pub fn detect(&self, img: &RgbImage) -> Result<Vec<SignCrop>> {
        detect(img, &self.detection)
    }

    /// Feature vectors of the characters in a crop, left to right.
    pub fn crop_features(&self, crop: &RgbImage) -> Vec<FeatureVector> {
        segment_image(crop, &self.segment, &self.detection.red, &self.detection.gray)
            .iter()
            .map(extract)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reading {
    pub digits: Vec<u32>,
    /// The predicted labels concatenated, e.g. "60". Empty when no characters were found.
    pub text: String,
}

#[derive(Clone, Debug)]
pub struct Recognition {
    pub crop: SignCrop,
    pub reading: Reading,
}

pub struct Recognizer {
    pub pipeline: Pipeline,
    pub model: MulticlassModel,
}

impl Recognizer {
    pub fn new(pipeline: Pipeline, model: MulticlassModel) -> Self {
        Recognizer { pipeline, model }
    }

    pub fn read_crop(&self, crop: &RgbImage) -> Result<Reading> {
        let digits = self
            .pipeline
            .crop_features(crop)
            .iter()
            .map(|f| Ok(self.model.predict(f.as_slice())?.label))
            .collect::<Result<Vec<u32>>>()?;
        let text = digits.iter().map(u32::to_string).collect();
        Ok(Reading { digits, text })
    }

    pub fn recognize(&self, img: &RgbImage) -> Result<Vec<Recognition>> {
        self.pipeline
            .detect(img)?
            .into_iter()
            .map(|crop| {
                let reading = self.read_crop(&crop.image)?;
                Ok(Recognition { crop, reading })
            })
            .collect()
    }
}

/// One line of a detection report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub image: String,
    pub index: usize,
    pub bbox: BBox,
    pub area: usize,
    pub metric: f64,
    pub red_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<String>,
}

impl DetectionRecord {
    pub fn new(image: &str, index: usize, crop: &SignCrop, reading: Option<&Reading>) -> Self {
        DetectionRecord {
            image: image.to_string(),
            index,
            bbox: crop.bbox,
            area: crop.area,
            metric: crop.metric,
            red_fraction: crop.red_fraction,
            digits: reading.map(|r| r.digits.clone()),
            speed: reading.map(|r| r.text.clone()),
        }
    }
}

/// Errors naming every speed class with no image in the manifest.
pub fn check_speed_classes(entries: &[Annotation]) -> Result<()> {
    let missing: Vec<String> = SPEEDS
        .iter()
        .filter(|&&s| !entries.iter().any(|e| e.signs.iter().any(|g| g.speed == s)))
        .map(u32::to_string)
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Training(format!(
            "corpus has no signs of class {}",
            missing.join(", ")
        )))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HarvestStats {
    pub signs: usize,
    /// Signs whose character count differed from the annotated digit count.
    pub skipped: usize,
}

/// Labeled features from the ground-truth sign crops of a corpus. A sign
/// contributes only when segmentation finds exactly as many characters as it
/// has digits, so labels pair up left to right.
pub fn corpus_training_set(
    manifest_path: &Path,
    entries: &[Annotation],
    pipeline: &Pipeline,
) -> Result<(Vec<(FeatureVector, u32)>, HarvestStats)> {
    let per_image = entries
        .par_iter()
        .map(|entry| {
            let img = load_entry_image(manifest_path, entry)?;
            let mut rows = Vec::new();
            let mut stats = HarvestStats::default();
            for sign in &entry.signs {
                stats.signs += 1;
                let feats = pipeline.crop_features(&img.crop(&sign.bbox));
                if feats.len() != sign.digits.len() {
                    stats.skipped += 1;
                    continue;
                }
                rows.extend(feats.into_iter().zip(sign.digits.iter().map(|d| d.digit)));
            }
            Ok((rows, stats))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all = Vec::new();
    let mut stats = HarvestStats::default();
    for (rows, s) in per_image {
        all.extend(rows);
        stats.signs += s.signs;
        stats.skipped += s.skipped;
    }
    Ok((all, stats))
}

/// Features of the built-in font glyphs at each integer scale.
pub fn font_training_set(digits: &[u32], scales: &[usize]) -> Result<Vec<(FeatureVector, u32)>> {
    let mut out = Vec::new();
    for &d in digits {
        for &s in scales {
            let glyph = normalize_glyph(&scaled_glyph(d, s)?)?;
            out.push((extract_glyph(&glyph), d));
        }
    }
    Ok(out)
}

/// Fraction of samples the model labels correctly, per class.
pub fn per_class_accuracy(model: &MulticlassModel, data: &[(FeatureVector, u32)]) -> Result<BTreeMap<u32, f64>> {
    let mut tally: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for (x, label) in data {
        let t = tally.entry(*label).or_default();
        t.1 += 1;
        if model.predict(x.as_slice())?.label == *label {
            t.0 += 1;
        }
    }
    Ok(tally
        .into_iter()
        .map(|(k, (ok, n))| (k, ok as f64 / n as f64))
        .collect())
}

/// Reads a manifest entry's image and checks it against the recorded size.
pub fn load_entry_image(manifest_path: &Path, entry: &Annotation) -> Result<RgbImage> {
    let path = resolve_image_path(manifest_path, entry);
    let img = read_image(&path).map_err(|e| Error::Input(format!("manifest entry {}: {e}", entry.path)))?;
    if img.width() != entry.width || img.height() != entry.height {
        return Err(Error::Input(format!(
            "manifest entry {}: image is {}x{}, manifest says {}x{}",
            entry.path,
            img.width(),
            img.height(),
            entry.width,
            entry.height
        )));
    }
    Ok(img)
}

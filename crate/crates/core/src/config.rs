//! Threshold and training settings, read from a TOML file.
//!
//! Every section and key is optional; missing values take their defaults.
//! `data/default.toml` lists all keys with their default values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detector::DetectionParams;
use crate::edges::CannyParams;
use crate::error::{Error, Result};
use crate::morph::MorphOp;
use crate::raster::{GrayWeights, RedThresholds};
use crate::segmenter::SegmentParams;
use crate::svm::{KernelSpec, TrainConfig};

pub const DEFAULT_CONFIG: &str = include_str!("../data/default.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub se_size: usize,
    pub morph_ops: Vec<MorphOp>,
    pub fill_ops: Vec<MorphOp>,
    pub metric_low: f64,
    pub metric_high: f64,
    pub red_ratio_min: f64,
    pub rim_inner: f64,
    pub rim_outer: f64,
    pub min_area: usize,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let d = DetectionParams::default();
        DetectorSection {
            se_size: d.se_size,
            morph_ops: d.morph_ops,
            fill_ops: d.fill_ops,
            metric_low: d.metric_low,
            metric_high: d.metric_high,
            red_ratio_min: d.red_ratio_min,
            rim_inner: d.rim_inner,
            rim_outer: d.rim_outer,
            min_area: d.min_area,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub c: f64,
    pub kernel: KernelKind,
    /// RBF width; absent means `1 / (dims * variance)` of the standardized features.
    pub gamma: Option<f64>,
    pub tolerance: f64,
    pub max_passes: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            c: t.c,
            kernel: KernelKind::Rbf,
            gamma: None,
            tolerance: t.tolerance,
            max_passes: t.max_passes,
        }
    }
}

impl TrainSection {
    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            c: self.c,
            kernel: match self.kernel {
                KernelKind::Linear => KernelSpec::Linear,
                KernelKind::Rbf => KernelSpec::Rbf { gamma: self.gamma },
            },
            tolerance: self.tolerance,
            max_passes: self.max_passes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalParams {
    /// Minimum IoU for a detection to match a ground-truth sign.
    pub iou_threshold: f64,
    /// Ascending radius bucket edges in pixels; bucket `k` is `[edges[k], edges[k+1])`,
    /// the last one closed.
    pub radius_edges: Vec<f64>,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            iou_threshold: 0.5,
            radius_edges: vec![15.0, 25.0, 40.0, 80.0],
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "iou_threshold must be in (0, 1], got {}",
                self.iou_threshold
            )));
        }
        if self.radius_edges.len() < 2 || self.radius_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParam(
                "radius_edges needs at least two strictly increasing values".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gray: GrayWeights,
    pub red: RedThresholds,
    pub canny: CannyParams,
    pub detector: DetectorSection,
    pub segmenter: SegmentParams,
    pub train: TrainSection,
    pub eval: EvalParams,
}

impl Config {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml(&text).map_err(|msg| Error::format(path, msg))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.detection_params().validate()?;
        self.train.to_train_config().validate()?;
        self.eval.validate()
    }

    pub fn detection_params(&self) -> DetectionParams {
        let d = &self.detector;
        DetectionParams {
            gray: self.gray,
            canny: self.canny,
            red: self.red,
            se_size: d.se_size,
            morph_ops: d.morph_ops.clone(),
            fill_ops: d.fill_ops.clone(),
            metric_low: d.metric_low,
            metric_high: d.metric_high,
            red_ratio_min: d.red_ratio_min,
            rim_inner: d.rim_inner,
            rim_outer: d.rim_outer,
            min_area: d.min_area,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

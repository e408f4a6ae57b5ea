//! One-against-one multiclass SVM over standardized features.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binary::{train_with_kernel, BinaryModel, TrainConfig};
use super::kernel::Kernel;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "speedsign-svm";
pub const MODEL_VERSION: u32 = 1;

/// Per-dimension affine map to zero mean and unit variance. Constant
/// dimensions keep scale 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit<X: AsRef<[f64]>>(xs: &[X]) -> Self {
        let dims = xs.first().map_or(0, |x| x.as_ref().len());
        let n = xs.len().max(1) as f64;
        let mut mean = vec![0.0; dims];
        for x in xs {
            for (m, v) in mean.iter_mut().zip(x.as_ref()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dims];
        for x in xs {
            for ((s, v), m) in var.iter_mut().zip(x.as_ref()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MulticlassModel {
    /// Sorted ascending.
    pub classes: Vec<u32>,
    pub kernel: Kernel,
    pub c: f64,
    pub standardizer: Standardizer,
    /// One machine per class pair `(classes[a], classes[b])`, `a < b`, in
    /// lexicographic pair order. `classes[a]` is the positive label.
    pub machines: Vec<BinaryModel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub label: u32,
    /// Vote count per entry of `classes`.
    pub votes: Vec<u32>,
    /// Summed `|f(x)|` of the machines voting for each class.
    pub margins: Vec<f64>,
}

pub fn train_multiclass<X: AsRef<[f64]> + Sync>(data: &[(X, u32)], cfg: &TrainConfig) -> Result<MulticlassModel> {
    cfg.validate()?;
    let classes: Vec<u32> = data
        .iter()
        .map(|(_, l)| *l)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::Training(format!(
            "need at least two classes, got {}",
            classes.len()
        )));
    }
    let dims = data[0].0.as_ref().len();
    if let Some((i, _)) = data.iter().enumerate().find(|(_, (x, _))| x.as_ref().len() != dims) {
        return Err(Error::Input(format!(
            "sample {i} has a different dimension than sample 0"
        )));
    }
    let standardizer = Standardizer::fit(&data.iter().map(|(x, _)| x.as_ref()).collect::<Vec<_>>());
    let zs: Vec<Vec<f64>> = data.iter().map(|(x, _)| standardizer.apply(x.as_ref())).collect();
    let kernel = cfg.kernel.resolve(&zs);
    kernel.validate()?;

    let pairs: Vec<(u32, u32)> = (0..classes.len())
        .flat_map(|a| ((a + 1)..classes.len()).map(move |b| (a, b)))
        .map(|(a, b)| (classes[a], classes[b]))
        .collect();
    let machines = pairs
        .par_iter()
        .map(|&(pos, neg)| {
            let (xs, ys): (Vec<&[f64]>, Vec<i8>) = zs
                .iter()
                .zip(data)
                .filter(|(_, (_, l))| *l == pos || *l == neg)
                .map(|(z, (_, l))| (z.as_slice(), if *l == pos { 1 } else { -1 }))
                .unzip();
            train_with_kernel(&xs, &ys, &kernel, cfg, pos, neg)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MulticlassModel {
        classes,
        kernel,
        c: cfg.c,
        standardizer,
        machines,
    })
}

impl MulticlassModel {
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.standardizer.dims() {
            return Err(Error::Input(format!(
                "model expects {} features, got {}",
                self.standardizer.dims(),
                x.len()
            )));
        }
        let z = self.standardizer.apply(x);
        let idx = |label: u32| self.classes.binary_search(&label).expect("machine label is a class");
        let mut votes = vec![0u32; self.classes.len()];
        let mut margins = vec![0.0; self.classes.len()];
        for m in &self.machines {
            let f = m.decide(&z);
            let winner = idx(if f >= 0.0 { m.label_pos } else { m.label_neg });
            votes[winner] += 1;
            margins[winner] += f.abs();
        }
        // Most votes, then largest summed margin, then the lower class.
        let mut best = 0;
        for k in 1..self.classes.len() {
            if votes[k] > votes[best] || (votes[k] == votes[best] && margins[k] > margins[best]) {
                best = k;
            }
        }
        Ok(Prediction {
            label: self.classes[best],
            votes,
            margins,
        })
    }

    pub fn to_json(&self) -> String {
        let file = ModelFileRef {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            model: self,
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, ModelParseError> {
        let head: ModelHeader = serde_json::from_str(text).map_err(|e| ModelParseError::Syntax(e.to_string()))?;
        if head.format != MODEL_FORMAT {
            return Err(ModelParseError::Syntax(format!(
                "unknown model format {:?}",
                head.format
            )));
        }
        if head.version != MODEL_VERSION {
            return Err(ModelParseError::Version(head.version));
        }
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelParseError::Syntax(e.to_string()))?;
        Ok(file.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            ModelParseError::Version(found) => Error::ModelVersion {
                found,
                expected: MODEL_VERSION,
            },
            ModelParseError::Syntax(msg) => Error::format(path, msg),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelParseError {
    #[error("malformed model: {0}")]
    Syntax(String),
    #[error("unsupported model format version {0} (this build reads version {MODEL_VERSION})")]
    Version(u32),
}

#[derive(Deserialize)]
struct ModelHeader {
    format: String,
    version: u32,
}

#[derive(Serialize)]
struct ModelFileRef<'a> {
    format: &'a str,
    version: u32,
    model: &'a MulticlassModel,
}

#[derive(Deserialize)]
struct ModelFile {
    model: MulticlassModel,
}

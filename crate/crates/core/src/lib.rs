//! Detection and recognition of circular red-rimmed speed-limit signs.
//!
//! The pipeline finds roughly circular closed regions in an edge map, keeps
//! those with a red rim, cuts out the dark characters inside, describes each
//! character with block-wise angle and run-count features, and classifies the
//! characters with a one-against-one soft-margin SVM.
//!
//! ```no_run
//! use speedsign::{io::read_image, recognize::{Pipeline, Recognizer}, svm::MulticlassModel};
//!
//! let model = MulticlassModel::load("model.json")?;
//! let recognizer = Recognizer::new(Pipeline::default(), model);
//! for found in recognizer.recognize(&read_image("scene.png")?)? {
//!     println!("{:?} {}", found.crop.bbox, found.reading.text);
//! }
//! # Ok::<(), speedsign::Error>(())
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bbox;
pub mod config;
pub mod dataset;
pub mod detector;
pub mod edges;
mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod morph;
pub mod raster;
pub mod recognize;
pub mod regions;
pub mod segmenter;
pub mod svm;

pub use bbox::BBox;
pub use config::Config;
pub use detector::{detect, DetectionParams, SignCrop};
pub use error::{Error, Result};
pub use features::{extract, FeatureVector};
pub use raster::{BinaryImage, GrayImage, RgbImage};
pub use segmenter::{segment, CharacterImage};
pub use svm::{train_multiclass, MulticlassModel, TrainConfig};

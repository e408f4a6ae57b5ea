//! Corpus generation and the JSON Lines manifest.
//!
//! A corpus directory holds the images plus `manifest.jsonl`, one
//! [`Annotation`] per line in class-then-index order:
//!
//! ```text
//! {"path":"60_0003.png","class":60,"width":320,"height":240,
//!  "signs":[{"speed":60,"bbox":[x0,y0,x1,y1],"center":[cx,cy],"radius":r,
//!            "digits":[{"digit":6,"bbox":[...]},{"digit":0,"bbox":[...]}]}]}
//! ```
//!
//! Bounding boxes are inclusive pixel ranges `[min_x, min_y, max_x, max_y]`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::render::{render_scene, Annotation, Background, SignSpec, MAX_ROTATION, SPEEDS};
use crate::error::{Error, Result};
use crate::io::{write_image, ImageFormat};
use crate::raster::{hsv_to_rgb, HsvPixel};

pub const MANIFEST_NAME: &str = "manifest.jsonl";

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusParams {
    pub n_per_class: usize,
    pub width: usize,
    pub height: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    pub noise_sigma: f64,
    pub blur_sigma: f64,
    /// Each image picks one of these uniformly.
    pub backgrounds: Vec<Background>,
    /// Rotations are drawn from `[-rotation_max, rotation_max]` degrees.
    pub rotation_max: f64,
    pub format: ImageFormat,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            n_per_class: 20,
            width: 320,
            height: 240,
            radius_min: 40.0,
            radius_max: 80.0,
            noise_sigma: 0.0,
            blur_sigma: 1.0,
            backgrounds: vec![Background::Plain],
            rotation_max: 0.0,
            format: ImageFormat::Png,
        }
    }
}

impl CorpusParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(Error::InvalidParam("n_per_class must be positive".into()));
        }
        if !(self.radius_min > 0.0 && self.radius_min <= self.radius_max) {
            return Err(Error::InvalidParam(format!(
                "need 0 < radius_min <= radius_max, got [{}, {}]",
                self.radius_min, self.radius_max
            )));
        }
        if 2.0 * self.radius_max + 2.0 > self.width.min(self.height) as f64 {
            return Err(Error::InvalidParam(format!(
                "radius_max {} does not fit in {}x{}",
                self.radius_max, self.width, self.height
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.blur_sigma >= 0.0) {
            return Err(Error::InvalidParam("noise and blur sigmas must be >= 0".into()));
        }
        if self.backgrounds.is_empty() {
            return Err(Error::InvalidParam("at least one background is required".into()));
        }
        if !(0.0..=MAX_ROTATION).contains(&self.rotation_max) {
            return Err(Error::InvalidParam(format!(
                "rotation_max must be in [0, {MAX_ROTATION}], got {}",
                self.rotation_max
            )));
        }
        Ok(())
    }
}

/// One planned image: everything needed to render it.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenePlan {
    pub file_name: String,
    pub spec: SignSpec,
    pub background: Background,
    pub seed: u64,
}

/// Draws every image's parameters from one seeded stream, class by class.
pub fn plan_corpus(params: &CorpusParams, seed: u64) -> Result<Vec<ScenePlan>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plans = Vec::with_capacity(SPEEDS.len() * params.n_per_class);
    for speed in SPEEDS {
        for i in 0..params.n_per_class {
            let radius = if params.radius_max > params.radius_min {
                rng.random_range(params.radius_min..=params.radius_max)
            } else {
                params.radius_min
            };
            let cx = rng.random_range(radius + 1.0..=params.width as f64 - radius - 1.0);
            let cy = rng.random_range(radius + 1.0..=params.height as f64 - radius - 1.0);
            let rim_color = hsv_to_rgb(HsvPixel {
                h: rng.random_range(0.86..0.92),
                s: rng.random_range(0.8..1.0),
                v: rng.random_range(0.55..0.75),
            });
            let rotation = if params.rotation_max > 0.0 {
                rng.random_range(-params.rotation_max..=params.rotation_max)
            } else {
                0.0
            };
            let background = params.backgrounds[rng.random_range(0..params.backgrounds.len())];
            let scene_seed = rng.next_u64();
            plans.push(ScenePlan {
                file_name: format!("{speed}_{i:04}.{}", params.format.extension()),
                spec: SignSpec {
                    speed,
                    center: (cx, cy),
                    radius,
                    rim_color,
                    rotation,
                    noise_sigma: params.noise_sigma,
                    blur_sigma: params.blur_sigma,
                },
                background,
                seed: scene_seed,
            });
        }
    }
    Ok(plans)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub dir: PathBuf,
    pub manifest_path: PathBuf,
    pub entries: Vec<Annotation>,
}

/// Renders `5 * n_per_class` images into `out_dir` and writes the manifest.
pub fn generate_corpus(params: &CorpusParams, seed: u64, out_dir: impl AsRef<Path>) -> Result<Corpus> {
    let dir = out_dir.as_ref();
    let plans = plan_corpus(params, seed)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let entries = plans
        .par_iter()
        .map(|plan| {
            let (img, mut ann) = render_scene(&plan.spec, plan.background, params.width, params.height, plan.seed)?;
            write_image(dir.join(&plan.file_name), &img)?;
            ann.path = plan.file_name.clone();
            Ok(ann)
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest_path = dir.join(MANIFEST_NAME);
    write_manifest(&manifest_path, &entries)?;
    Ok(Corpus {
        dir: dir.to_path_buf(),
        manifest_path,
        entries,
    })
}

pub fn manifest_to_string(entries: &[Annotation]) -> String {
    let mut out = String::new();
    for e in entries {
        writeln!(out, "{}", serde_json::to_string(e).expect("annotation serializes")).unwrap();
    }
    out
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[Annotation]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, manifest_to_string(entries)).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| Error::format(path, format!("line {}: {e}", n + 1))))
        .collect()
}

/// Image path of a manifest entry, resolved against the manifest's directory.
pub fn resolve_image_path(manifest_path: &Path, entry: &Annotation) -> PathBuf {
    let p = Path::new(&entry.path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CorpusParams {
        CorpusParams {
            n_per_class: 2,
            width: 120,
            height: 100,
            radius_min: 25.0,
            radius_max: 40.0,
            ..CorpusParams::default()
        }
    }

    #[test]
    fn class_balanced_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_corpus(&small(), 5, dir.path()).unwrap();
        assert_eq!(corpus.entries.len(), 10);
        for speed in SPEEDS {
            assert_eq!(corpus.entries.iter().filter(|e| e.class == Some(speed)).count(), 2);
        }
        assert_eq!(corpus.entries[0].path, "20_0000.png");
        assert_eq!(read_manifest(&corpus.manifest_path).unwrap(), corpus.entries);
        for e in &corpus.entries {
            assert!(resolve_image_path(&corpus.manifest_path, e).exists());
        }
    }

    #[test]
    fn same_seed_same_manifest() {
        let a = plan_corpus(&small(), 9).unwrap();
        let b = plan_corpus(&small(), 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, plan_corpus(&small(), 10).unwrap());
    }

    #[test]
    fn rejects_oversized_radius() {
        let p = CorpusParams {
            radius_max: 60.0,
            ..small()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn bad_manifest_line_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(MANIFEST_NAME);
        fs::write(
            &p,
            "{\"path\":\"a.png\",\"width\":1,\"height\":1,\"signs\":[]}\nnot json\n",
        )
        .unwrap();
        let err = read_manifest(&p).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }
}

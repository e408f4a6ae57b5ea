use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use speedsign::dataset::{self, Background, CorpusParams, SignSpec};
use speedsign::eval::evaluate;
use speedsign::features::{extract_glyph, FEATURE_LEN};
use speedsign::recognize::{check_speed_classes, corpus_training_set, Pipeline, Recognizer};
use speedsign::segmenter::segment_image;
use speedsign::svm::KernelSpec;
use speedsign::{BBox, BinaryImage, CharacterImage, RgbImage};

fn to_py(e: speedsign::Error) -> PyErr {
    match e {
        speedsign::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Inclusive `(min_x, min_y, max_x, max_y)`.
type BoxTuple = (usize, usize, usize, usize);

fn bbox_tuple(b: &BBox) -> BoxTuple {
    (b.min_x, b.min_y, b.max_x, b.max_y)
}

/// Parses a JSON string with Python's `json` module.
fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn serialize<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// RGB image, 8 bits per channel.
#[pyclass(name = "Image", module = "speedsign_py")]
struct PyImage {
    inner: RgbImage,
}

#[pymethods]
impl PyImage {
    /// Image from packed RGB bytes, row-major.
    #[new]
    fn new(width: usize, height: usize, data: Vec<u8>) -> PyResult<Self> {
        RgbImage::from_raw(width, height, data)
            .map(|inner| PyImage { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn filled(width: usize, height: usize, color: [u8; 3]) -> Self {
        PyImage {
            inner: RgbImage::filled(width, height, color),
        }
    }

    /// Reads a PNG or binary PPM file.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        speedsign::io::read_image(path)
            .map(|inner| PyImage { inner })
            .map_err(to_py)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        speedsign::io::write_image(path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<[u8; 3]> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err(format!("pixel ({x}, {y}) is outside the image")));
        }
        Ok(self.inner.get(x, y))
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.as_raw())
    }

    /// Sub-image for an inclusive `(min_x, min_y, max_x, max_y)` box.
    fn crop(&self, bbox: BoxTuple) -> PyResult<Self> {
        let b = BBox::new(bbox.0, bbox.1, bbox.2, bbox.3);
        if b.max_x >= self.inner.width() || b.max_y >= self.inner.height() {
            return Err(PyValueError::new_err("box extends past the image"));
        }
        Ok(PyImage {
            inner: self.inner.crop(&b),
        })
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Thresholds and training settings; defaults match the shipped config file.
#[pyclass(name = "Config", module = "speedsign_py")]
struct PyConfig {
    inner: speedsign::Config,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        PyConfig {
            inner: speedsign::Config::default(),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        speedsign::Config::load(path)
            .map(|inner| PyConfig { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner = speedsign::Config::from_toml(text).map_err(PyValueError::new_err)?;
        inner.validate().map_err(to_py)?;
        Ok(PyConfig { inner })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }
}

fn config_of(config: Option<PyRef<'_, PyConfig>>) -> speedsign::Config {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

#[pyclass(name = "SignCrop", module = "speedsign_py", get_all)]
struct PySignCrop {
    bbox: BoxTuple,
    area: usize,
    metric: f64,
    red_fraction: f64,
    image: Py<PyImage>,
}

#[pymethods]
impl PySignCrop {
    fn __repr__(&self) -> String {
        format!(
            "SignCrop(bbox={:?}, metric={:.4}, red_fraction={:.4})",
            self.bbox, self.metric, self.red_fraction
        )
    }
}

/// A segmented 60x30 character.
#[pyclass(name = "Character", module = "speedsign_py")]
struct PyCharacter {
    inner: CharacterImage,
}

#[pymethods]
impl PyCharacter {
    #[getter]
    fn order_index(&self) -> usize {
        self.inner.order_index()
    }

    /// Rows of the glyph as strings, `#` for ink and `.` for background.
    fn rows(&self) -> Vec<String> {
        let g = self.inner.glyph();
        (0..g.height())
            .map(|y| (0..g.width()).map(|x| if g.get(x, y) { '#' } else { '.' }).collect())
            .collect()
    }

    /// The 36 zoned features: 18 angles, then 18 transit ratios.
    fn features(&self) -> Vec<f64> {
        speedsign::extract(&self.inner).as_slice().to_vec()
    }
}

/// One-against-one SVM over character features.
#[pyclass(name = "Model", module = "speedsign_py")]
struct PyModel {
    inner: speedsign::MulticlassModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (features, labels, kernel = "rbf", c = 10.0, gamma = None, tolerance = 1e-3))]
    fn train(
        features: Vec<Vec<f64>>,
        labels: Vec<u32>,
        kernel: &str,
        c: f64,
        gamma: Option<f64>,
        tolerance: f64,
    ) -> PyResult<Self> {
        if features.len() != labels.len() {
            return Err(PyValueError::new_err(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let kernel = match kernel {
            "rbf" => KernelSpec::Rbf { gamma },
            "linear" => KernelSpec::Linear,
            other => return Err(PyValueError::new_err(format!("unknown kernel {other:?}"))),
        };
        let cfg = speedsign::TrainConfig {
            c,
            kernel,
            tolerance,
            ..Default::default()
        };
        let data: Vec<(Vec<f64>, u32)> = features.into_iter().zip(labels).collect();
        speedsign::train_multiclass(&data, &cfg)
            .map(|inner| PyModel { inner })
            .map_err(to_py)
    }

    /// Trains on the ground-truth signs of a corpus manifest.
    #[staticmethod]
    #[pyo3(signature = (manifest, config = None))]
    fn train_on_manifest(manifest: PathBuf, config: Option<PyRef<'_, PyConfig>>) -> PyResult<Self> {
        let cfg = config_of(config);
        let entries = dataset::read_manifest(&manifest).map_err(to_py)?;
        check_speed_classes(&entries).map_err(to_py)?;
        let (data, _) = corpus_training_set(&manifest, &entries, &Pipeline::from_config(&cfg)).map_err(to_py)?;
        speedsign::train_multiclass(&data, &cfg.train.to_train_config())
            .map(|inner| PyModel { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        speedsign::MulticlassModel::load(path)
            .map(|inner| PyModel { inner })
            .map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        speedsign::MulticlassModel::from_json(text)
            .map(|inner| PyModel { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn classes(&self) -> Vec<u32> {
        self.inner.classes.clone()
    }

    #[getter]
    fn n_machines(&self) -> usize {
        self.inner.machines.len()
    }

    fn predict(&self, features: Vec<f64>) -> PyResult<u32> {
        self.inner.predict(&features).map(|p| p.label).map_err(to_py)
    }

    /// Label plus the per-class vote counts, in `classes` order.
    fn predict_votes(&self, features: Vec<f64>) -> PyResult<(u32, Vec<u32>)> {
        self.inner.predict(&features).map(|p| (p.label, p.votes)).map_err(to_py)
    }
}

/// Candidate signs, largest first.
#[pyfunction]
#[pyo3(signature = (image, config = None))]
fn detect(py: Python<'_>, image: PyRef<'_, PyImage>, config: Option<PyRef<'_, PyConfig>>) -> PyResult<Vec<PySignCrop>> {
    let params = config_of(config).detection_params();
    let crops = speedsign::detect(&image.inner, &params).map_err(to_py)?;
    crops
        .into_iter()
        .map(|c| {
            Ok(PySignCrop {
                bbox: bbox_tuple(&c.bbox),
                area: c.area,
                metric: c.metric,
                red_fraction: c.red_fraction,
                image: Py::new(py, PyImage { inner: c.image })?,
            })
        })
        .collect()
}

/// Characters inside a sign crop, left to right.
#[pyfunction]
#[pyo3(signature = (crop, config = None))]
fn segment(crop: PyRef<'_, PyImage>, config: Option<PyRef<'_, PyConfig>>) -> Vec<PyCharacter> {
    let cfg = config_of(config);
    segment_image(&crop.inner, &cfg.segmenter, &cfg.red, &cfg.gray)
        .into_iter()
        .map(|inner| PyCharacter { inner })
        .collect()
}

/// Features of a 60x30 glyph given as rows of `#` (ink) and `.`.
#[pyfunction]
fn extract(rows: Vec<String>) -> PyResult<Vec<f64>> {
    let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
    if refs.iter().any(|r| r.chars().any(|c| c != '#' && c != '.')) {
        return Err(PyValueError::new_err("glyph rows may contain only '#' and '.'"));
    }
    let glyph = BinaryImage::from_ascii(&refs);
    let ch = CharacterImage::new(glyph, 0).map_err(to_py)?;
    let f = extract_glyph(ch.glyph());
    debug_assert_eq!(f.as_slice().len(), FEATURE_LEN);
    Ok(f.as_slice().to_vec())
}

/// `(bbox, speed text)` for every sign found in the image.
#[pyfunction]
#[pyo3(signature = (image, model, config = None))]
fn recognize(
    image: PyRef<'_, PyImage>,
    model: PyRef<'_, PyModel>,
    config: Option<PyRef<'_, PyConfig>>,
) -> PyResult<Vec<(BoxTuple, String)>> {
    let recognizer = Recognizer::new(Pipeline::from_config(&config_of(config)), model.inner.clone());
    let found = recognizer.recognize(&image.inner).map_err(to_py)?;
    Ok(found
        .iter()
        .map(|f| (bbox_tuple(&f.crop.bbox), f.reading.text.clone()))
        .collect())
}

/// One synthetic sign on a background; returns the image and its annotation as a dict.
#[pyfunction]
#[pyo3(signature = (
    speed, center, radius, width = 320, height = 240, background = "plain", seed = 0,
    rotation = 0.0, noise = 0.0, blur = 0.0
))]
#[allow(clippy::too_many_arguments)]
fn render_scene<'py>(
    py: Python<'py>,
    speed: u32,
    center: (f64, f64),
    radius: f64,
    width: usize,
    height: usize,
    background: &str,
    seed: u64,
    rotation: f64,
    noise: f64,
    blur: f64,
) -> PyResult<(PyImage, Bound<'py, PyAny>)> {
    let bg: Background = background.parse().map_err(to_py)?;
    let spec = SignSpec {
        rotation,
        noise_sigma: noise,
        blur_sigma: blur,
        ..SignSpec::new(speed, center, radius)
    };
    let (img, ann) = dataset::render_scene(&spec, bg, width, height, seed).map_err(to_py)?;
    Ok((PyImage { inner: img }, json_to_py(py, &serialize(&ann)?)?))
}

/// Writes a corpus and its manifest into `out_dir`; returns the manifest path.
#[pyfunction]
#[pyo3(signature = (
    out_dir, n_per_class = 20, seed = 7, noise = 0.0, blur = 1.0, radius_min = 40.0, radius_max = 80.0,
    backgrounds = vec!["plain".to_string()], rotation_max = 0.0
))]
#[allow(clippy::too_many_arguments)]
fn generate_corpus(
    out_dir: PathBuf,
    n_per_class: usize,
    seed: u64,
    noise: f64,
    blur: f64,
    radius_min: f64,
    radius_max: f64,
    backgrounds: Vec<String>,
    rotation_max: f64,
) -> PyResult<PathBuf> {
    let backgrounds = backgrounds
        .iter()
        .map(|b| b.parse::<Background>())
        .collect::<speedsign::Result<Vec<_>>>()
        .map_err(to_py)?;
    let params = CorpusParams {
        n_per_class,
        noise_sigma: noise,
        blur_sigma: blur,
        radius_min,
        radius_max,
        backgrounds,
        rotation_max,
        ..CorpusParams::default()
    };
    dataset::generate_corpus(&params, seed, out_dir)
        .map(|c| c.manifest_path)
        .map_err(to_py)
}

/// Evaluation report over a manifest, as a dict.
#[pyfunction]
#[pyo3(signature = (manifest, model, config = None))]
fn evaluate_corpus<'py>(
    py: Python<'py>,
    manifest: PathBuf,
    model: PyRef<'_, PyModel>,
    config: Option<PyRef<'_, PyConfig>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config_of(config);
    let entries = dataset::read_manifest(&manifest).map_err(to_py)?;
    let recognizer = Recognizer::new(Pipeline::from_config(&cfg), model.inner.clone());
    let report = evaluate(&manifest, &entries, &recognizer, &cfg.eval).map_err(to_py)?;
    json_to_py(py, &serialize(&report)?)
}

#[pymodule]
fn speedsign_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PySignCrop>()?;
    m.add_class::<PyCharacter>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(recognize, m)?)?;
    m.add_function(wrap_pyfunction!(render_scene, m)?)?;
    m.add_function(wrap_pyfunction!(generate_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_corpus, m)?)?;
    m.add("SPEEDS", dataset::SPEEDS.to_vec())?;
    m.add("FEATURE_LEN", FEATURE_LEN)?;
    Ok(())
}

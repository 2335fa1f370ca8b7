//! Python bindings for the cry analysis pipeline.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cry_core::analytics::{self, Direction, FeatureMatrix, LogRegOptions};
use cry_core::audio_io::{self, Site};
use cry_core::config::PipelineConfig;
use cry_core::pipeline::{self, Outcome};
use cry_core::segmenter::CrySegmentation;
use cry_core::synthcry::{self, CorpusProfile};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Config", skip_from_py_object)]
#[derive(Clone, Default)]
struct PyConfig {
    inner: PipelineConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: PipelineConfig::parse(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: PipelineConfig::load(path).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

fn config_of(config: Option<PyRef<'_, PyConfig>>) -> PipelineConfig {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

#[pyclass(name = "Segmentation", frozen, skip_from_py_object)]
struct PySegmentation {
    inner: CrySegmentation,
}

#[pymethods]
impl PySegmentation {
    #[getter]
    fn expirations(&self) -> Vec<(f64, f64)> {
        self.inner.expirations.iter().map(|i| (i.onset, i.offset)).collect()
    }

    #[getter]
    fn pauses(&self) -> Vec<(f64, f64)> {
        self.inner.pauses.iter().map(|i| (i.onset, i.offset)).collect()
    }

    #[getter]
    fn total_cry_seconds(&self) -> f64 {
        self.inner.total_cry_seconds
    }

    fn __len__(&self) -> usize {
        self.inner.num_units()
    }
}

#[pyclass(name = "Features", frozen, skip_from_py_object)]
struct PyFeatures {
    names: Vec<String>,
    values: Vec<f64>,
    segmentation: CrySegmentation,
}

#[pymethods]
impl PyFeatures {
    #[getter]
    fn names(&self) -> Vec<String> {
        self.names.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[getter]
    fn segmentation(&self) -> PySegmentation {
        PySegmentation {
            inner: self.segmentation.clone(),
        }
    }

    fn as_dict(&self) -> BTreeMap<String, f64> {
        self.names.iter().cloned().zip(self.values.iter().copied()).collect()
    }
}

#[pyclass(name = "ScreeningModel", frozen, skip_from_py_object)]
struct PyModel {
    inner: analytics::ScreeningModel,
}

fn matrix(
    x: Vec<Vec<f64>>,
    labels: Vec<u8>,
    names: Vec<String>,
    sites: Option<Vec<String>>,
    patients: Option<Vec<String>>,
) -> PyResult<FeatureMatrix> {
    let n = x.len();
    let d = names.len();
    if x.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err(format!("every row needs {d} values")));
    }
    let values = Array2::from_shape_fn((n, d), |(i, j)| x[i][j]);
    let sites = sites.map_or_else(|| vec![Site::Other; n], |s| s.iter().map(|s| Site::parse_lenient(s)).collect());
    let patients = patients.unwrap_or_else(|| (0..n).map(|i| format!("row{i}")).collect());
    FeatureMatrix::new(names, values, labels, sites, patients).map_err(err)
}

#[pymethods]
impl PyModel {
    /// Fits on rows `x` with 0/1 `labels`; `reg_strength` is the inverse
    /// regularisation strength.
    #[staticmethod]
    #[pyo3(signature = (x, labels, names, reg_strength=1.0))]
    fn fit(x: Vec<Vec<f64>>, labels: Vec<u8>, names: Vec<String>, reg_strength: f64) -> PyResult<Self> {
        let m = matrix(x, labels, names, None, None)?;
        Ok(Self {
            inner: analytics::train_logreg(&m, reg_strength, &LogRegOptions::default()).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: serde_json::from_str(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner).expect("model always serialises")
    }

    #[getter]
    fn features(&self) -> Vec<String> {
        self.inner.features.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.inner.bias
    }

    fn predict_proba(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let d = self.inner.features.len();
        x.iter()
            .map(|row| {
                if row.len() == d {
                    Ok(self.inner.predict_proba_row(row))
                } else {
                    Err(PyValueError::new_err(format!("every row needs {d} values")))
                }
            })
            .collect()
    }
}

/// Samples and rate after conversion to 16 kHz mono.
#[pyfunction]
fn load_audio(path: PathBuf) -> PyResult<(Vec<f64>, u32)> {
    let clip = audio_io::load_canonical(path).map_err(err)?;
    let rate = clip.sample_rate();
    Ok((clip.into_samples(), rate))
}

#[pyfunction]
#[pyo3(signature = (path, config=None))]
fn segment(path: PathBuf, config: Option<PyRef<'_, PyConfig>>) -> PyResult<PySegmentation> {
    let clip = audio_io::load_canonical(path).map_err(err)?;
    let s = pipeline::segment_clip(&clip, &config_of(config)).map_err(err)?;
    Ok(PySegmentation { inner: s.segmentation })
}

/// The 38-value feature row, or `None` when the recording fails the
/// minimum-cry rule.
#[pyfunction]
#[pyo3(signature = (path, config=None))]
fn extract(path: PathBuf, config: Option<PyRef<'_, PyConfig>>) -> PyResult<Option<PyFeatures>> {
    let clip = audio_io::load_canonical(path).map_err(err)?;
    match pipeline::analyze_clip(&clip, &config_of(config)).map_err(err)? {
        Outcome::Features(f) => Ok(Some(PyFeatures {
            names: pipeline::feature_names(),
            values: f.row(),
            segmentation: f.segmentation,
        })),
        Outcome::Skipped { .. } => Ok(None),
    }
}

#[pyfunction]
fn feature_names() -> Vec<String> {
    pipeline::feature_names()
}

#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    Ok(analytics::roc_auc(&scores, &labels).map_err(err)?.auc)
}

#[pyfunction]
fn sensitivity_at_specificity(scores: Vec<f64>, labels: Vec<u8>, specificity: f64) -> PyResult<f64> {
    let curve = analytics::roc_auc(&scores, &labels).map_err(err)?;
    Ok(analytics::sensitivity_at_specificity(&curve, specificity))
}

/// Selected features mapped to `+1` or `-1`, the sign of their label
/// correlation at every site.
#[pyfunction]
fn select_features(
    x: Vec<Vec<f64>>,
    labels: Vec<u8>,
    names: Vec<String>,
    sites: Vec<String>,
    study_sites: Vec<String>,
) -> PyResult<BTreeMap<String, i8>> {
    let m = matrix(x, labels, names, Some(sites), None)?;
    let study: Vec<Site> = study_sites.iter().map(|s| Site::parse_lenient(s)).collect();
    let report = analytics::select_consistent_features(&m, &study).map_err(err)?;
    Ok(report
        .features
        .into_iter()
        .filter_map(|f| {
            let sign = match f.direction? {
                Direction::Positive => 1,
                Direction::Negative => -1,
            };
            f.selected.then_some((f.feature, sign))
        })
        .collect())
}

/// Writes a synthetic corpus and returns the manifest path.
#[pyfunction]
#[pyo3(signature = (out_dir, profile="reported", seed=0, n_per_class=None))]
fn synth_corpus(out_dir: PathBuf, profile: &str, seed: u64, n_per_class: Option<usize>) -> PyResult<PathBuf> {
    let mut p = CorpusProfile::preset(profile)
        .ok_or_else(|| PyValueError::new_err(format!("unknown profile `{profile}`")))?;
    if let Some(n) = n_per_class {
        p.n_per_class = n;
    }
    Ok(synthcry::make_corpus(&out_dir, &p, seed).map_err(err)?.manifest)
}

#[pymodule]
fn crybio(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PySegmentation>()?;
    m.add_class::<PyFeatures>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(load_audio, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_at_specificity, m)?)?;
    m.add_function(wrap_pyfunction!(select_features, m)?)?;
    m.add_function(wrap_pyfunction!(synth_corpus, m)?)?;
    Ok(())
}

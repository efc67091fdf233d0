//! Python bindings: meta-feature extraction, recommendation and the
//! statistics used for labeling.

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mt::data::{load_dataset, preprocess, Dataset, Format};
use mt::labeling::friedman::critical_difference;
use mt::labeling::wilcoxon::{wilcoxon_signed_rank, Alternative};
use mt::metafeatures::{extract_all, schema as full_schema};
use mt::metalevel::{recommend as recommend_with, MetaModel};

fn err(e: mt::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn load(path: &str, target: &str) -> PyResult<Dataset> {
    let path = Path::new(path);
    let raw = load_dataset(path, Format::from_path(path).map_err(err)?, target).map_err(err)?;
    let mut d = preprocess(&raw).map_err(err)?;
    d.name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset").to_string();
    Ok(d)
}

/// (name, description) pairs in extraction order.
#[pyfunction]
#[pyo3(signature = (include_rl = true))]
fn schema(include_rl: bool) -> Vec<(String, String)> {
    full_schema(include_rl).into_iter().map(|(n, d)| (n, d.to_string())).collect()
}

/// Meta-features of a CSV or ARFF file as a name -> value dict.
#[pyfunction]
#[pyo3(signature = (path, target = "class", include_rl = true))]
fn extract(path: &str, target: &str, include_rl: bool) -> PyResult<BTreeMap<String, f64>> {
    let v = extract_all(&load(path, target)?, include_rl).map_err(err)?;
    Ok(v.names.into_iter().zip(v.values).collect())
}

/// (label, tuning score, extraction seconds) from a trained model file.
#[pyfunction]
#[pyo3(signature = (model, path, target = "class"))]
fn recommend(model: &str, path: &str, target: &str) -> PyResult<(String, f64, f64)> {
    let m = MetaModel::load(Path::new(model)).map_err(err)?;
    let r = recommend_with(&m, &load(path, target)?).map_err(err)?;
    Ok((r.label.to_string(), r.score, r.extraction_time))
}

/// Signed-rank test of x against y; returns (p_value, statistic, exact).
#[pyfunction]
#[pyo3(signature = (x, y, alternative = "greater"))]
fn wilcoxon(x: Vec<f64>, y: Vec<f64>, alternative: &str) -> PyResult<(f64, f64, bool)> {
    let alt = match alternative {
        "greater" => Alternative::Greater,
        "two-sided" | "two_sided" => Alternative::TwoSided,
        other => return Err(PyValueError::new_err(format!("unknown alternative `{other}`"))),
    };
    let r = wilcoxon_signed_rank(&x, &y, alt).map_err(err)?;
    Ok((r.p_value, r.statistic, r.exact))
}

#[pyfunction]
fn bac(truth: Vec<usize>, predicted: Vec<usize>) -> PyResult<f64> {
    mt::eval::bac(&truth, &predicted).map_err(err)
}

#[pyfunction]
fn auc(truth: Vec<bool>, scores: Vec<f64>) -> PyResult<f64> {
    mt::eval::auc(&truth, &scores).map_err(err)
}

/// Nemenyi critical difference for k algorithms over n settings.
#[pyfunction]
#[pyo3(signature = (k, n, alpha = 0.05))]
fn nemenyi_cd(k: usize, n: usize, alpha: f64) -> PyResult<f64> {
    critical_difference(k, n, alpha).map_err(err)
}

#[pymodule]
fn metatune(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(schema, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(recommend, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(bac, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(nemenyi_cd, m)?)?;
    Ok(())
}

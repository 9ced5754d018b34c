//! Python bindings. Series are passed as lists of rows (each a list of
//! floats); results come back as dictionaries.

use lindep_core::harness::{run_experiment as run_experiment_core, ExperimentConfig};
use lindep_core::measures::{self, DependenceResult, MeasureOptions, Tails};
use lindep_core::nulldist::{self, NullFamily, DEFAULT_NULL_SAMPLES};
use lindep_core::series::{LagWindow, Partition, TaperSpec, TimeSeriesMatrix, Truncation};
use lindep_core::simulate::{self, FilterSpec, VarSpec};
use lindep_core::{ess, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::Domain(_) | Error::LagOutOfRange { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> PyResult<T> {
    serde_json::from_value(Value::String(s.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} {s:?}")))
}

fn taper(window: &str, truncation: &str) -> PyResult<TaperSpec> {
    let truncation = match truncation.parse::<usize>() {
        Ok(u) => Truncation::Lags(u),
        Err(_) => parse_enum::<Truncation>("truncation", truncation)?,
    };
    Ok(TaperSpec { window: parse_enum::<LagWindow>("window", window)?, truncation })
}

fn options(
    tests: Option<Vec<String>>,
    null_samples: usize,
    seed: u64,
    window: &str,
    truncation: &str,
) -> PyResult<MeasureOptions> {
    let tests = match tests {
        Some(t) => t.iter().map(|s| NullFamily::parse(s)).collect::<Result<Vec<_>, _>>().map_err(to_py)?,
        None => NullFamily::ALL.to_vec(),
    };
    Ok(MeasureOptions { taper: taper(window, truncation)?, null_samples, seed, tests })
}

fn result_dict<'py>(py: Python<'py>, r: &DependenceResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("direct_value", r.direct_value)?;
    d.set_item("n_obs", r.n_obs)?;
    let pv = PyDict::new(py);
    let stats = PyDict::new(py);
    for (fam, v) in &r.verdicts {
        pv.set_item(fam.label(), v.p_value)?;
        stats.set_item(fam.label(), v.statistic)?;
    }
    d.set_item("p_values", pv)?;
    d.set_item("statistics", stats)?;
    let terms = PyList::empty(py);
    for t in &r.terms {
        let td = PyDict::new(py);
        td.set_item("indices", t.indices.clone())?;
        td.set_item("partial_corr", t.partial_corr)?;
        td.set_item("conditioning_dim", t.conditioning_dim)?;
        td.set_item("eta", t.eta)?;
        td.set_item("effective_dof", t.effective_dof)?;
        terms.append(td)?;
    }
    d.set_item("terms", terms)?;
    d.set_item("warnings", r.warnings.clone())?;
    Ok(d)
}

fn stack(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, w: Vec<Vec<f64>>) -> PyResult<(TimeSeriesMatrix, Partition)> {
    let part = Partition::contiguous(x.len(), y.len(), w.len());
    let rows: Vec<Vec<f64>> = x.into_iter().chain(y).chain(w).collect();
    Ok((TimeSeriesMatrix::from_rows(rows).map_err(to_py)?, part))
}

/// Gaussian (conditional) mutual information between the row blocks x and y
/// given w, with its tests.
#[pyfunction]
#[pyo3(signature = (x, y, w=None, tests=None, null_samples=DEFAULT_NULL_SAMPLES, seed=0, window="none", truncation="full"))]
#[allow(clippy::too_many_arguments)]
fn mi_gaussian<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    w: Option<Vec<Vec<f64>>>,
    tests: Option<Vec<String>>,
    null_samples: usize,
    seed: u64,
    window: &str,
    truncation: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = options(tests, null_samples, seed, window, truncation)?;
    let (series, part) = stack(x, y, w.unwrap_or_default())?;
    let r = py.detach(|| measures::mi_gaussian(&series, &part, &opts)).map_err(to_py)?;
    result_dict(py, &r)
}

/// Granger causality from block y to block x given w, with history lengths
/// p (own) and q (source).
#[pyfunction]
#[pyo3(signature = (x, y, p, q, w=None, tests=None, null_samples=DEFAULT_NULL_SAMPLES, seed=0, window="none", truncation="full"))]
#[allow(clippy::too_many_arguments)]
fn granger_causality<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    p: usize,
    q: usize,
    w: Option<Vec<Vec<f64>>>,
    tests: Option<Vec<String>>,
    null_samples: usize,
    seed: u64,
    window: &str,
    truncation: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = options(tests, null_samples, seed, window, truncation)?;
    let (series, part) = stack(x, y, w.unwrap_or_default())?;
    let r = py.detach(|| measures::granger_causality(&series, &part, p, q, &opts)).map_err(to_py)?;
    result_dict(py, &r)
}

/// Modified t and F tests of the (partial) correlation of x and y given w.
#[pyfunction]
#[pyo3(signature = (x, y, w=None, tails="two", window="none", truncation="full"))]
fn partial_corr_test<'py>(
    py: Python<'py>,
    x: Vec<f64>,
    y: Vec<f64>,
    w: Option<Vec<Vec<f64>>>,
    tails: &str,
    window: &str,
    truncation: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let tails: Tails = parse_enum("tails", tails)?;
    let opts = MeasureOptions { taper: taper(window, truncation)?, ..MeasureOptions::default() };
    let r = match w.filter(|w| !w.is_empty()) {
        None => measures::pearson_test_modified(&x, &y, tails, &opts),
        Some(w) => {
            let w = TimeSeriesMatrix::from_rows(w).map_err(to_py)?;
            measures::partial_corr_test_modified(&x, &y, w.data(), tails, &opts)
        }
    }
    .map_err(to_py)?;
    result_dict(py, &r)
}

/// Effective sample size of the correlation between a and b.
#[pyfunction]
#[pyo3(signature = (a, b, window="none", truncation="full"))]
fn effective_sample_size(a: Vec<f64>, b: Vec<f64>, window: &str, truncation: &str) -> PyResult<f64> {
    Ok(ess::effective_sample_size(&a, &b, &taper(window, truncation)?).map_err(to_py)?.eta)
}

/// Left-tail Monte-Carlo p-value of a statistic under Λ*(dof).
#[pyfunction]
#[pyo3(signature = (dof, statistic, samples=DEFAULT_NULL_SAMPLES, seed=0))]
fn lambda_star_pvalue(py: Python<'_>, dof: Vec<f64>, statistic: f64, samples: usize, seed: u64) -> PyResult<f64> {
    py.detach(|| nulldist::lambda_star_pvalue(&dof, statistic, samples, seed)).map_err(to_py)
}

/// Active information storage of order p.
#[pyfunction]
fn active_information_storage(x: Vec<f64>, p: usize) -> PyResult<f64> {
    measures::active_information_storage(&x, p).map_err(to_py)
}

/// Simulates the VAR(1) generator and optionally low-pass filters it.
/// Returns the rows x_1..x_k, y_1..y_l, w_1..w_c.
#[pyfunction]
#[pyo3(signature = (k=1, l=1, c=0, length=512, seed=0, phi_x=0.3, phi_y=-0.8, phi_w=0.4, phi_xy=0.0, filter_kind="fir_least_squares", filter_order=0))]
#[allow(clippy::too_many_arguments)]
fn simulate_var(
    k: usize,
    l: usize,
    c: usize,
    length: usize,
    seed: u64,
    phi_x: f64,
    phi_y: f64,
    phi_w: f64,
    phi_xy: f64,
    filter_kind: &str,
    filter_order: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let spec = VarSpec { k, l, c, phi_x, phi_y, phi_w, phi_xy, length, ..VarSpec::default() };
    let filter =
        FilterSpec { kind: parse_enum("filter kind", filter_kind)?, order: filter_order, ..FilterSpec::fir(0) };
    let z = simulate::filter_apply(&simulate::var_simulate(&spec, seed).map_err(to_py)?, &filter).map_err(to_py)?;
    Ok(z.rows().map(<[f64]>::to_vec).collect())
}

/// Runs an experiment from a JSON configuration and returns the report as
/// JSON.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(format!("invalid configuration: {e}")))?;
    let report = py.detach(|| run_experiment_core(&cfg)).map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn lindep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mi_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(granger_causality, m)?)?;
    m.add_function(wrap_pyfunction!(partial_corr_test, m)?)?;
    m.add_function(wrap_pyfunction!(effective_sample_size, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_star_pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(active_information_storage, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_var, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}

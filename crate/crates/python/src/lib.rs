//! Python bindings: closed sets, distance traces, the mean transforms,
//! verdicts, scenarios and the command runner.
//!
//! Structured results (verdicts, scenario reports, residuals) are returned
//! as plain dicts and lists built from their JSON form.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use wijsum_core::cli::{self, parse_set, RunConfig};
use wijsum_core::ideals::{ideal_verdict as core_verdict, VerdictMode, VerdictParams};
use wijsum_core::identities::identity_residuals as core_identities;
use wijsum_core::metric_sets::{self, distance as core_distance};
use wijsum_core::statistical::c_lambda_stat_density;
use wijsum_core::transforms::{self, MeanSeries, StrongMethod};
use wijsum_core::{lambda_for_horizon, scenarios, Ideal, IdealKind, MetricPoint};

fn err(e: wijsum_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &value)
}

fn point(coords: Vec<f64>) -> PyResult<MetricPoint> {
    MetricPoint::new(coords).map_err(err)
}

/// A nonempty closed subset of Euclidean space, parsed from shape syntax
/// such as `ball((0, 0), 1)` or `hyperplane((0, 1), 0)`.
#[pyclass(name = "ClosedSet", frozen)]
struct PyClosedSet(wijsum_core::ClosedSet);

#[pymethods]
impl PyClosedSet {
    #[new]
    fn new(shape: &str) -> PyResult<Self> {
        parse_set(shape).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `d(x, A)`.
    fn distance(&self, x: Vec<f64>) -> PyResult<f64> {
        core_distance(&point(x)?, &self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ClosedSet({})", self.0.describe())
    }
}

/// Values `d(x_p, A_k)` for probes `p` and `k = 1..=horizon`.
#[pyclass(name = "DistanceTrace", frozen)]
struct PyTrace(wijsum_core::DistanceTrace);

#[pymethods]
impl PyTrace {
    /// Materializes a trace from sequence syntax, e.g.
    /// `cycle: point(1, 0) | point(-1, 0)`.
    #[staticmethod]
    #[pyo3(signature = (sequence, probes, horizon, target=None))]
    fn from_sequence(sequence: &str, probes: Vec<Vec<f64>>, horizon: usize, target: Option<&str>) -> PyResult<Self> {
        let seq = cli::parse_sequence(sequence).map_err(err)?;
        seq.validate(horizon).map_err(err)?;
        let probes = probes.into_iter().map(point).collect::<PyResult<Vec<_>>>()?;
        let target = target.map(parse_set).transpose().map_err(err)?;
        let seq = seq.into_sequence(sequence.to_string());
        metric_sets::trace(&seq, &probes, horizon, target.as_ref())
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (probes, rows, target=None))]
    fn from_rows(probes: Vec<Vec<f64>>, rows: Vec<Vec<f64>>, target: Option<Vec<f64>>) -> PyResult<Self> {
        let probes = probes.into_iter().map(point).collect::<PyResult<Vec<_>>>()?;
        wijsum_core::DistanceTrace::from_rows(probes, rows, target)
            .map(Self)
            .map_err(err)
    }

    /// Reads the CSV layout written by [`PyTrace::to_csv`].
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        cli::parse_trace_csv(text.as_bytes()).map(Self).map_err(err)
    }

    fn to_csv(&self) -> PyResult<String> {
        let bytes = cli::write_csv(&cli::trace_rows(&self.0)).map_err(err)?;
        String::from_utf8(bytes).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.0.horizon()
    }

    #[getter]
    fn probes(&self) -> Vec<Vec<f64>> {
        self.0.probes().iter().map(|p| p.coords().to_vec()).collect()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows().to_vec()
    }

    fn target(&self) -> Option<Vec<f64>> {
        self.0.target_row().map(<[f64]>::to_vec)
    }

    fn __repr__(&self) -> String {
        format!("DistanceTrace(probes={}, horizon={})", self.0.num_probes(), self.0.horizon())
    }
}

fn method(spec: &str, trace: &PyTrace) -> PyResult<wijsum_core::IndexMethod> {
    lambda_for_horizon(spec, trace.0.horizon(), 0).map_err(err)
}

fn values(s: MeanSeries) -> (Vec<u64>, Vec<Vec<f64>>) {
    (s.window_end, s.values)
}

/// `lambda(1), ..., lambda(n_max)` for an index-method expression.
#[pyfunction]
fn parse_lambda(expr: &str, n_max: usize) -> PyResult<Vec<u64>> {
    wijsum_core::parse_lambda(expr, n_max)
        .map(|m| m.values().to_vec())
        .map_err(err)
}

/// Cesaro means; returns `(window_end, values[probe][n - 1])`.
#[pyfunction]
fn c1(trace: &PyTrace) -> (Vec<u64>, Vec<Vec<f64>>) {
    values(transforms::c1(&trace.0))
}

#[pyfunction]
fn c_lambda(trace: &PyTrace, lambda: &str) -> PyResult<(Vec<u64>, Vec<Vec<f64>>)> {
    transforms::c_lambda(&trace.0, &method(lambda, trace)?)
        .map(values)
        .map_err(err)
}

#[pyfunction]
fn d_lambda(trace: &PyTrace, lambda: &str) -> PyResult<(Vec<u64>, Vec<Vec<f64>>)> {
    transforms::d_lambda(&trace.0, &method(lambda, trace)?)
        .map(values)
        .map_err(err)
}

/// Strong means of `|d(x, A_k) - d(x, A)|^p`; `kind` is `c_lambda`,
/// `d_lambda` or `c1`.
#[pyfunction]
#[pyo3(signature = (trace, kind, lambda="n", p=1.0))]
fn strong_mean(trace: &PyTrace, kind: &str, lambda: &str, p: f64) -> PyResult<(Vec<u64>, Vec<Vec<f64>>)> {
    let m = match kind {
        "c_lambda" => StrongMethod::Clambda,
        "d_lambda" => StrongMethod::Dlambda,
        "c1" => StrongMethod::C1,
        other => return Err(PyKeyError::new_err(other.to_string())),
    };
    transforms::strong_mean(&trace.0, m, &method(lambda, trace)?, p)
        .map(values)
        .map_err(err)
}

/// `C_lambda`-statistical densities of `eps`-exceedances, `values[probe][n - 1]`.
#[pyfunction]
#[pyo3(signature = (trace, eps, lambda="n"))]
fn stat_density(trace: &PyTrace, eps: f64, lambda: &str) -> PyResult<Vec<Vec<f64>>> {
    c_lambda_stat_density(&trace.0, &method(lambda, trace)?, eps)
        .map(|d| d.values)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (mode, trace, lambda, eps, delta=None, p=None, ideal="density-zero", threshold=0.05))]
#[allow(clippy::too_many_arguments)]
fn ideal_verdict<'py>(
    py: Python<'py>,
    mode: &str,
    trace: &PyTrace,
    lambda: &str,
    eps: f64,
    delta: Option<f64>,
    p: Option<f64>,
    ideal: &str,
    threshold: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = VerdictMode::parse(mode).map_err(err)?;
    let ideal = match ideal {
        "fin" => Ideal::fin(),
        "density-zero" | "density_zero" => Ideal::density_zero(),
        other => return Err(PyKeyError::new_err(other.to_string())),
    }
    .with_threshold(threshold);
    let mut params = VerdictParams::new(eps);
    if let Some(d) = delta {
        params = params.with_delta(d);
    }
    if let Some(p) = p {
        params = params.with_p(p);
    }
    let v = core_verdict(mode, &trace.0, &method(lambda, trace)?, &ideal, &params).map_err(err)?;
    let out = serialize(py, &v)?;
    out.set_item("overall", format!("{:?}", v.overall()))?;
    Ok(out)
}

#[pyfunction]
fn identity_residuals<'py>(py: Python<'py>, trace: &PyTrace, lambda: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = core_identities(&trace.0, &method(lambda, trace)?).map_err(err)?;
    let out = serialize(py, &r)?;
    out.set_item("max_residual", r.max_residual())?;
    Ok(out)
}

#[pyfunction]
fn scenario_names() -> Vec<&'static str> {
    scenarios::CATALOG.to_vec()
}

/// Runs a catalog scenario and returns its report.
#[pyfunction]
#[pyo3(signature = (name, suite_lambdas=Vec::new()))]
fn run_scenario<'py>(py: Python<'py>, name: &str, suite_lambdas: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let mut sc = scenarios::builtin(name).map_err(err)?;
    sc.suite_lambdas = suite_lambdas;
    let report = scenarios::run(&sc).map_err(err)?;
    let out = serialize(py, &report)?;
    out.set_item("ok", report.ok())?;
    Ok(out)
}

/// Runs a command as the `wijsum` binary would. `settings` maps config keys
/// to a value or a list of values. Returns `(exit_code, output, summary)`.
#[pyfunction]
#[pyo3(signature = (command, settings=None))]
fn execute<'py>(
    py: Python<'py>,
    command: &str,
    settings: Option<&Bound<'py, PyDict>>,
) -> PyResult<(i32, Bound<'py, PyBytes>, String)> {
    let mut pairs = vec![("command".to_string(), command.to_string())];
    if let Some(d) = settings {
        for (k, v) in d.iter() {
            let key: String = k.extract()?;
            let vals: Vec<Bound<'py, PyAny>> = match v.cast::<PyList>() {
                Ok(list) => list.iter().collect(),
                Err(_) => vec![v],
            };
            for x in vals {
                pairs.push((key.clone(), x.str()?.to_string()));
            }
        }
    }
    let cfg = RunConfig::from_pairs(None, &pairs).map_err(err)?;
    let o = cli::execute(&cfg);
    Ok((o.exit_code, PyBytes::new(py, &o.output), o.summary))
}

#[pymodule]
fn wijsum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyClosedSet>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(parse_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(c1, m)?)?;
    m.add_function(wrap_pyfunction!(c_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(d_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(strong_mean, m)?)?;
    m.add_function(wrap_pyfunction!(stat_density, m)?)?;
    m.add_function(wrap_pyfunction!(ideal_verdict, m)?)?;
    m.add_function(wrap_pyfunction!(identity_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(execute, m)?)?;
    m.add("IDEAL_KINDS", vec![format!("{:?}", IdealKind::Fin), format!("{:?}", IdealKind::DensityZero)])?;
    Ok(())
}

//! Python bindings. Instances, setups and streams cross the boundary as JSON
//! (a `str` or anything `json.dumps` accepts); results come back as dicts.

use ocokit::experiment::{run_oco as run_oco_core, OcoRegime};
use ocokit::jeo::{self, Estimator, JeoInstance, StreamSpec};
use ocokit::regret::Regime;
use ocokit::robust::{self, FamilyParams, FeasibilityConfig, Planted, RobustInstance, Scheme};
use ocokit::streams::OcoInstance;
use ocokit::{OfflineOracle, ProximalSetup, WeightKind};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyString;
use rand::SeedableRng;
use serde::de::DeserializeOwned;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_text(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = obj.cast::<PyString>() {
        return Ok(s.to_str()?.to_owned());
    }
    let dumped = obj.py().import("json")?.call_method1("dumps", (obj,))?;
    dumped.extract()
}

fn parse<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    serde_json::from_str(&json_text(obj)?).map_err(err)
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn setup(obj: &Bound<'_, PyAny>) -> PyResult<ProximalSetup> {
    parse(obj)
}

#[pyfunction]
fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// argmin_u ⟨xi, u⟩ + V_z(u) over the setup's domain.
#[pyfunction]
fn prox(setup_json: &Bound<'_, PyAny>, z: Vec<f64>, xi: Vec<f64>) -> PyResult<Vec<f64>> {
    setup(setup_json)?.prox(&z, &xi).map_err(err)
}

/// Bregman distance V_z(u).
#[pyfunction]
fn bregman(setup_json: &Bound<'_, PyAny>, z: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
    setup(setup_json)?.bregman(&z, &u).map_err(err)
}

#[pyfunction]
fn set_width(setup_json: &Bound<'_, PyAny>) -> PyResult<f64> {
    Ok(setup(setup_json)?.set_width())
}

#[pyfunction]
#[pyo3(signature = (instance, regime, horizon, weights=None))]
fn run_oco<'py>(
    py: Python<'py>,
    instance: &Bound<'py, PyAny>,
    regime: &str,
    horizon: usize,
    weights: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let inst: OcoInstance = parse(instance)?;
    let regime: OcoRegime = regime.parse().map_err(err)?;
    let weights = match weights {
        None => None,
        Some("uniform") => Some(WeightKind::Uniform),
        Some("increasing") => Some(WeightKind::Increasing),
        Some(w) => return Err(err(format!("unknown weights `{w}` (uniform | increasing)"))),
    };
    let run = py.detach(|| run_oco_core(&inst, regime, horizon, weights, &OfflineOracle::default())).map_err(err)?;
    let out = serde_json::json!({
        "regime": regime,
        "horizon": horizon,
        "realized": run.report.realized,
        "bound": run.bound(),
        "within_bound": run.within_bound(1e-6),
        "oracle_gap": run.report.oracle_gap,
        "components": run.report.components,
        "max_step_residual": run.trace.max_residual(),
        "max_cancellation": run.trace.max_cancellation(),
        "iterates": run.trace.points(),
    });
    to_py(py, &out)
}

#[pyfunction]
#[pyo3(signature = (instance, scheme="strong-strong", eps=0.1, tau=0.5, horizon=None, doubling=true))]
fn ro_solve<'py>(
    py: Python<'py>,
    instance: &Bound<'py, PyAny>,
    scheme: &str,
    eps: f64,
    tau: f64,
    horizon: Option<usize>,
    doubling: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let inst: RobustInstance = parse(instance)?;
    inst.validate().map_err(err)?;
    let scheme: Scheme = scheme.parse().map_err(err)?;
    let cfg = FeasibilityConfig { eps, tau, horizon, scheme, double_on_inconclusive: doubling, ..Default::default() };
    let solve = py.detach(|| robust::run_scheme(&inst, &cfg, &OfflineOracle::default())).map_err(err)?;
    to_py(py, &serde_json::to_value(&solve).map_err(err)?)
}

/// A seeded planted instance (m = 3, n = 5) as a JSON string.
#[pyfunction]
#[pyo3(signature = (seed, feasible, margin=0.15))]
fn planted_robust(seed: u64, feasible: bool, margin: f64) -> PyResult<String> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let status = if feasible { Planted::Feasible } else { Planted::Infeasible };
    let inst = robust::planted_instance(&mut rng, &FamilyParams::default(), status, margin).map_err(err)?;
    serde_json::to_string(&inst).map_err(err)
}

#[pyfunction]
fn run_jeo<'py>(
    py: Python<'py>,
    instance: &Bound<'py, PyAny>,
    stream: &Bound<'py, PyAny>,
    regime: &str,
    horizon: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let inst: JeoInstance = parse(instance)?;
    inst.validate().map_err(err)?;
    let spec: StreamSpec = parse(stream)?;
    let regime: Regime = regime.parse().map_err(err)?;
    let mut est = Estimator::new(spec).map_err(err)?;
    let run = py.detach(|| jeo::run_jeo(&inst, &mut est, regime, horizon, &OfflineOracle::default())).map_err(err)?;
    to_py(py, &serde_json::to_value(&run).map_err(err)?)
}

#[pymodule]
fn pyocokit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add_function(wrap_pyfunction!(prox, m)?)?;
    m.add_function(wrap_pyfunction!(bregman, m)?)?;
    m.add_function(wrap_pyfunction!(set_width, m)?)?;
    m.add_function(wrap_pyfunction!(run_oco, m)?)?;
    m.add_function(wrap_pyfunction!(ro_solve, m)?)?;
    m.add_function(wrap_pyfunction!(planted_robust, m)?)?;
    m.add_function(wrap_pyfunction!(run_jeo, m)?)?;
    Ok(())
}

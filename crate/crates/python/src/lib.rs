//! Python bindings for `duelbench-core`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use duelbench_core::harness::presets::{preset, PRESET_NAMES};
use duelbench_core::harness::{simulate, ExperimentConfig};
use duelbench_core::metrics::{self, BoundParams};
use duelbench_core::rex3;
use duelbench_core::rng::{seeded, DuelRng};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Seeded random stream shared by sampling calls.
#[pyclass(name = "Rng")]
struct PyRng {
    inner: DuelRng,
}

#[pymethods]
impl PyRng {
    #[new]
    fn new(seed: u64) -> Self {
        Self {
            inner: seeded(seed),
        }
    }
}

#[pyclass(name = "PreferenceMatrix", frozen)]
struct PyPreferenceMatrix {
    inner: duelbench_core::PreferenceMatrix,
}

#[pymethods]
impl PyPreferenceMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = duelbench_core::PreferenceMatrix::validate(&rows).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn savage(k: usize) -> PyResult<Self> {
        let inner = duelbench_core::PreferenceMatrix::savage(k).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn bvs() -> Self {
        Self {
            inner: duelbench_core::PreferenceMatrix::bvs(),
        }
    }

    #[staticmethod]
    fn from_utilities(mu: Vec<f64>) -> PyResult<Self> {
        let inner = duelbench_core::PreferenceMatrix::from_utilities(&mu).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let inner = duelbench_core::PreferenceMatrix::load(&path).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(value_err)
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let k = self.inner.k();
        if i >= k || j >= k {
            return Err(value_err(format!(
                "index ({i}, {j}) outside a {k}x{k} matrix"
            )));
        }
        Ok(self.inner.get(i, j))
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn borda_scores(&self) -> Vec<f64> {
        self.inner.borda_scores()
    }

    fn copeland_scores(&self) -> Vec<usize> {
        self.inner.copeland_scores()
    }

    fn condorcet_winner(&self) -> Option<usize> {
        self.inner.condorcet_winner()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    fn condorcet_regret(&self, a: usize, b: usize) -> PyResult<f64> {
        let istar = self
            .inner
            .condorcet_winner()
            .ok_or_else(|| value_err("matrix has no Condorcet winner"))?;
        let k = self.inner.k();
        if a >= k || b >= k {
            return Err(value_err(format!("arm out of range for k = {k}")));
        }
        Ok(metrics::condorcet_regret(&self.inner, istar, a, b))
    }
}

#[pyclass(name = "Rex3State")]
struct PyRex3State {
    inner: duelbench_core::Rex3State,
}

#[pymethods]
impl PyRex3State {
    #[new]
    #[pyo3(signature = (k, gamma = 0.5))]
    fn new(k: usize, gamma: f64) -> PyResult<Self> {
        let inner = duelbench_core::Rex3State::with_gamma(k, gamma).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_parts(weights: Vec<f64>, gamma: f64, t: u64) -> PyResult<Self> {
        let inner = duelbench_core::Rex3State::from_parts(weights, gamma, t).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_record(text: &str) -> PyResult<Self> {
        let inner = duelbench_core::Rex3State::from_record(text).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn to_record(&self) -> String {
        self.inner.to_record()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[setter]
    fn set_gamma(&mut self, gamma: f64) -> PyResult<()> {
        self.inner.set_gamma(gamma).map_err(value_err)
    }

    #[getter]
    fn t(&self) -> u64 {
        self.inner.t()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn distribution(&self) -> Vec<f64> {
        self.inner.distribution()
    }

    fn select_pair(&self, rng: &mut PyRng) -> (usize, usize) {
        self.inner.select_pair(&mut rng.inner)
    }

    fn update(&mut self, a: usize, b: usize, psi: f64) -> PyResult<()> {
        let k = self.inner.k();
        if a >= k || b >= k {
            return Err(value_err(format!("arm out of range for k = {k}")));
        }
        if !(-1.0..=1.0).contains(&psi) {
            return Err(value_err(format!("psi = {psi} outside [-1, 1]")));
        }
        self.inner.update(a, b, psi);
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!(
            "Rex3State(k={}, gamma={}, t={})",
            self.inner.k(),
            self.inner.gamma(),
            self.inner.t()
        )
    }
}

#[pyfunction]
fn chat_values(a: usize, b: usize, p: Vec<f64>, psi: f64) -> PyResult<Vec<f64>> {
    rex3::chat_values(a, b, &p, psi).map_err(value_err)
}

#[pyfunction]
fn tau(gmax: f64, gmin: f64) -> PyResult<f64> {
    rex3::tau(gmax, gmin).map_err(value_err)
}

#[pyfunction]
fn optimal_gamma(k: usize, tau: f64) -> f64 {
    rex3::optimal_gamma(k, tau)
}

#[pyfunction]
#[pyo3(signature = (k, gamma, gmax, gmin = 0.0))]
fn regret_bound(k: usize, gamma: f64, gmax: f64, gmin: f64) -> PyResult<f64> {
    let bp = BoundParams::new(k, gamma, gmax, gmin).map_err(value_err)?;
    Ok(metrics::regret_bound(&bp))
}

#[pyfunction]
#[pyo3(signature = (k, gamma, gmax, gmin = 0.0))]
fn halved_regret_bound(k: usize, gamma: f64, gmax: f64, gmin: f64) -> PyResult<f64> {
    let bp = BoundParams::new(k, gamma, gmax, gmin).map_err(value_err)?;
    Ok(metrics::halved_regret_bound(&bp))
}

#[pyfunction]
fn bandit_regret(x: Vec<f64>, istar: usize, a: usize, b: usize) -> PyResult<f64> {
    if [istar, a, b].iter().any(|&i| i >= x.len()) {
        return Err(value_err("arm out of range"));
    }
    Ok(metrics::bandit_regret(&x, istar, a, b))
}

/// Runs an experiment described by a TOML config and returns the CSV curve.
#[pyfunction]
fn run_config(py: Python<'_>, toml: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_toml_str(toml).map_err(value_err)?;
    py.detach(|| simulate(&cfg).map(|r| r.to_csv_string()))
        .map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (name, runs = None, horizon = None, seed = None))]
fn run_preset(
    py: Python<'_>,
    name: &str,
    runs: Option<usize>,
    horizon: Option<u64>,
    seed: Option<u64>,
) -> PyResult<String> {
    let p = preset(name)
        .ok_or_else(|| value_err(format!("unknown preset `{name}`")))?
        .with_overrides(runs, horizon, seed);
    py.detach(|| p.run_csv()).map_err(value_err)
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    PRESET_NAMES.to_vec()
}

#[pymodule]
fn duelbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRng>()?;
    m.add_class::<PyPreferenceMatrix>()?;
    m.add_class::<PyRex3State>()?;
    m.add_function(wrap_pyfunction!(chat_values, m)?)?;
    m.add_function(wrap_pyfunction!(tau, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(regret_bound, m)?)?;
    m.add_function(wrap_pyfunction!(halved_regret_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bandit_regret, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    Ok(())
}

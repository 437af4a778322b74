//! Python module `uplink_meta`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::uplink_meta as core;
use core::moments::{GilPelaezOptions, MomentEngine, MomentKernel};
use core::sim::SimConfig;
use core::{DominantModel, SystemParams};

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kernel(name: &str) -> PyResult<MomentKernel> {
    match name {
        "pgfl-exact" => Ok(MomentKernel::PgflExact),
        "scaled-laplace" => Ok(MomentKernel::ScaledLaplace),
        other => Err(PyValueError::new_err(format!("unknown kernel {other:?}"))),
    }
}

/// System parameters; powers in watts.
#[pyclass(name = "SystemParams", from_py_object)]
#[derive(Clone)]
struct PyParams(SystemParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (bs_density=1e-5, path_loss=4.0, compensation=0.4, power_control=8e-6, max_power=0.2, noise=1e-9))]
    fn new(bs_density: f64, path_loss: f64, compensation: f64, power_control: f64, max_power: f64, noise: f64) -> PyResult<Self> {
        SystemParams::new(bs_density, path_loss, compensation, power_control, max_power, noise)
            .map(PyParams)
            .map_err(err)
    }

    #[getter]
    fn compensation(&self) -> f64 {
        self.0.compensation
    }

    fn crossover_radius(&self) -> f64 {
        self.0.crossover_radius()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Dominant-interferer approximation of `P(P_s > γ)` at each γ.
#[pyfunction]
fn meta_proposed(params: &PyParams, theta: f64, gammas: Vec<f64>) -> PyResult<Vec<f64>> {
    let m = DominantModel::new(params.0).map_err(err)?;
    gammas.iter().map(|&g| m.meta(theta, g).map_err(err)).collect()
}

/// Beta approximation of the meta distribution.
#[pyfunction]
#[pyo3(signature = (params, theta, gammas, kernel_name="pgfl-exact"))]
fn meta_beta(params: &PyParams, theta: f64, gammas: Vec<f64>, kernel_name: &str) -> PyResult<Vec<f64>> {
    let e = MomentEngine::new(params.0).map_err(err)?;
    let shape = e.beta_shape(theta, kernel(kernel_name)?).map_err(err)?;
    gammas.iter().map(|&g| shape.ccdf(g).map_err(err)).collect()
}

/// Exact meta distribution by inversion of the moments.
#[pyfunction]
fn meta_gil_pelaez(py: Python<'_>, params: &PyParams, theta: f64, gammas: Vec<f64>) -> PyResult<Vec<f64>> {
    let p = params.0;
    py.detach(|| {
        let e = MomentEngine::new(p)?;
        e.gil_pelaez(theta, &gammas, &GilPelaezOptions::default()).map(|r| r.values)
    })
    .map_err(err)
}

/// Real moment `E[P_s^b]`.
#[pyfunction]
#[pyo3(signature = (params, theta, b, kernel_name="pgfl-exact"))]
fn moment(params: &PyParams, theta: f64, b: f64, kernel_name: &str) -> PyResult<f64> {
    let e = MomentEngine::new(params.0).map_err(err)?;
    e.real_moment(theta, b, kernel(kernel_name)?).map_err(err)
}

type Table = Vec<Vec<f64>>;

/// Simulated meta distribution: rows per θ, columns per γ, with 95% half-widths.
#[pyfunction]
#[pyo3(signature = (params, thetas, gammas, n_realizations=100, seed=1))]
fn meta_simulated(
    py: Python<'_>,
    params: &PyParams,
    thetas: Vec<f64>,
    gammas: Vec<f64>,
    n_realizations: usize,
    seed: u64,
) -> PyResult<(Table, Table)> {
    let p = params.0;
    let cfg = SimConfig {
        n_realizations,
        seed,
        ..SimConfig::for_params(&p)
    };
    py.detach(|| core::sim::empirical_meta(&p, &cfg, &thetas, &gammas))
        .map(|m| (m.values, m.ci_half_width))
        .map_err(err)
}

#[pymodule]
fn uplink_meta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(meta_proposed, m)?)?;
    m.add_function(wrap_pyfunction!(meta_beta, m)?)?;
    m.add_function(wrap_pyfunction!(meta_gil_pelaez, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(meta_simulated, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

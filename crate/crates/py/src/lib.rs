//! Python bindings: channel parameters, hops, relays, closed-form metrics and simulation.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use uwoc_relay::egg_channel::{self as egg, Detection};
use uwoc_relay::metrics::{self, ModulationRegistry, ModulationScheme};
use uwoc_relay::{fixtures, monte_carlo, relay_chain, Error};

create_exception!(uwoc_relay, UwocError, PyException, "Numerical failure in the evaluation engine.");
create_exception!(uwoc_relay, ParameterDegenerateError, UwocError, "The requested expansion does not exist.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::ParameterDegenerate(_) => ParameterDegenerateError::new_err(e.to_string()),
        other => UwocError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for uwoc_relay::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn detection(r: u8) -> PyResult<Detection> {
    Detection::try_from(r).map_err(PyValueError::new_err)
}

fn scheme(name: &str) -> PyResult<ModulationScheme> {
    ModulationRegistry::builtin().get(name).cloned().py()
}

/// Mixture Exponential-Generalized-Gamma irradiance law.
#[pyclass(name = "EggParams", module = "uwoc_relay", frozen, from_py_object)]
#[derive(Clone)]
struct PyEggParams(egg::EggParams);

#[pymethods]
impl PyEggParams {
    #[new]
    fn new(omega: f64, lam: f64, a: f64, b: f64, c: f64) -> PyResult<Self> {
        egg::EggParams::new(omega, lam, a, b, c).py().map(Self)
    }

    /// A shipped fixture: egg_a, egg_b, pure_exp or pure_gg.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        fixtures::params(name).py().map(Self)
    }

    #[staticmethod]
    fn fixture_names() -> Vec<&'static str> {
        fixtures::builtin_names()
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.0.omega
    }
    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda
    }
    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }
    #[getter]
    fn b(&self) -> f64 {
        self.0.b
    }
    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    fn moment(&self, k: f64) -> PyResult<f64> {
        self.0.moment(k).py()
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn normalized_variance(&self) -> f64 {
        self.0.normalized_variance()
    }

    fn scintillation_index(&self) -> f64 {
        egg::scintillation_index(&self.0)
    }

    fn pdf(&self, irradiance: f64) -> PyResult<f64> {
        egg::irradiance_pdf(&self.0, irradiance).py()
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!("EggParams(omega={}, lam={}, a={}, b={}, c={})", p.omega, p.lambda, p.a, p.b, p.c)
    }
}

/// One hop: fading law, detection order `r` (1 heterodyne, 2 IM/DD) and `μ_r`.
#[pyclass(name = "Hop", module = "uwoc_relay", frozen, from_py_object)]
#[derive(Clone)]
struct PyHop(egg::HopConfig);

#[pymethods]
impl PyHop {
    #[new]
    fn new(params: &PyEggParams, r: u8, mu: f64) -> PyResult<Self> {
        egg::HopConfig::new(params.0, detection(r)?, mu).py().map(Self)
    }

    /// Builds the hop from its average SNR `γ̄` (linear).
    #[staticmethod]
    fn from_average_snr(params: &PyEggParams, r: u8, avg_snr: f64) -> PyResult<Self> {
        egg::HopConfig::from_average_snr(params.0, detection(r)?, avg_snr).py().map(Self)
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    #[getter]
    fn r(&self) -> u8 {
        self.0.detection.order()
    }

    fn snr_pdf(&self, gamma: f64) -> PyResult<f64> {
        egg::snr_pdf(&self.0, gamma).py()
    }

    fn snr_cdf(&self, gamma: f64) -> PyResult<f64> {
        egg::snr_cdf(&self.0, gamma).py()
    }

    fn snr_moment(&self, k: f64) -> PyResult<f64> {
        self.0.snr_moment(k).py()
    }

    fn __repr__(&self) -> String {
        format!("Hop(r={}, mu={})", self.0.detection.order(), self.0.mu)
    }
}

/// Monte Carlo estimate with its standard error.
#[pyclass(name = "SimulationReport", module = "uwoc_relay", frozen, get_all)]
struct PyReport {
    estimate: f64,
    std_error: f64,
    n_samples: u64,
    seed: u64,
    wall_time: f64,
}

impl From<monte_carlo::SimulationReport> for PyReport {
    fn from(r: monte_carlo::SimulationReport) -> Self {
        Self {
            estimate: r.estimate,
            std_error: r.std_error,
            n_samples: r.n_samples,
            seed: r.seed,
            wall_time: r.wall_time,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "SimulationReport(estimate={:e}, std_error={:e}, n_samples={})",
            self.estimate, self.std_error, self.n_samples
        )
    }
}

/// Dual-hop fixed-gain AF relay; `c` defaults to the semi-blind gain of hop 1.
#[pyclass(name = "Relay", module = "uwoc_relay", frozen)]
struct PyRelay(relay_chain::RelayConfig);

#[pymethods]
impl PyRelay {
    #[new]
    #[pyo3(signature = (hop1, hop2, c=None))]
    fn new(hop1: &PyHop, hop2: &PyHop, c: Option<f64>) -> PyResult<Self> {
        match c {
            Some(c) => relay_chain::RelayConfig::with_gain_constant(hop1.0, hop2.0, c),
            None => relay_chain::RelayConfig::new(hop1.0, hop2.0),
        }
        .py()
        .map(Self)
    }

    #[getter]
    fn gain_constant(&self) -> f64 {
        self.0.c
    }

    fn cdf(&self, gamma: f64) -> PyResult<f64> {
        relay_chain::e2e_cdf(&self.0, gamma).py()
    }

    fn pdf(&self, gamma: f64) -> PyResult<f64> {
        relay_chain::e2e_pdf(&self.0, gamma).py()
    }

    fn cdf_asymptotic(&self, gamma: f64) -> PyResult<f64> {
        relay_chain::e2e_cdf_asymptotic(&self.0, gamma).py()
    }

    fn moment(&self, n: u32) -> PyResult<f64> {
        relay_chain::e2e_moment(&self.0, n).py()
    }

    fn amount_of_fading(&self, n: u32) -> PyResult<f64> {
        relay_chain::amount_of_fading(&self.0, n).py()
    }

    fn diversity_order(&self) -> f64 {
        relay_chain::diversity_order(&self.0)
    }

    fn outage(&self, gamma_th: f64) -> PyResult<f64> {
        metrics::outage_probability(&self.0, gamma_th).py()
    }

    /// Average BER of a registered scheme (see `modulations()`).
    fn ber(&self, modulation: &str) -> PyResult<f64> {
        metrics::average_ber_exact(&self.0, &scheme(modulation)?).py()
    }

    fn ber_asymptotic(&self, modulation: &str) -> PyResult<f64> {
        metrics::average_ber_asymptotic(&self.0, &scheme(modulation)?).py()
    }

    /// Ergodic capacity in nats per channel use.
    fn capacity(&self) -> PyResult<f64> {
        metrics::ergodic_capacity(&self.0).py()
    }

    #[pyo3(signature = (gamma_th, n=1_000_000, seed=1))]
    fn simulate_outage(&self, py: Python<'_>, gamma_th: f64, n: u64, seed: u64) -> PyResult<PyReport> {
        py.detach(|| monte_carlo::simulate_outage(&self.0, gamma_th, n, seed)).py().map(Into::into)
    }

    #[pyo3(signature = (modulation, n=1_000_000, seed=1))]
    fn simulate_ber(&self, py: Python<'_>, modulation: &str, n: u64, seed: u64) -> PyResult<PyReport> {
        let m = scheme(modulation)?;
        py.detach(|| monte_carlo::simulate_ber(&self.0, &m, n, seed)).py().map(Into::into)
    }

    #[pyo3(signature = (n=1_000_000, seed=1))]
    fn simulate_capacity(&self, py: Python<'_>, n: u64, seed: u64) -> PyResult<PyReport> {
        py.detach(|| monte_carlo::simulate_capacity(&self.0, n, seed)).py().map(Into::into)
    }

    #[pyo3(signature = (k, n=1_000_000, seed=1))]
    fn simulate_moment(&self, py: Python<'_>, k: u32, n: u64, seed: u64) -> PyResult<PyReport> {
        py.detach(|| monte_carlo::simulate_moment(&self.0, k, n, seed)).py().map(Into::into)
    }

    fn __repr__(&self) -> String {
        format!("Relay(r=({}, {}), C={})", self.0.hop1.detection.order(), self.0.hop2.detection.order(), self.0.c)
    }
}

/// `γ₁γ₂/(γ₂ + C)`.
#[pyfunction]
fn combine_snr(gamma1: f64, gamma2: f64, c: f64) -> f64 {
    relay_chain::combine_snr(gamma1, gamma2, c)
}

/// Conditional BER of a registered scheme at instantaneous SNR `gamma`.
#[pyfunction]
fn conditional_ber(modulation: &str, gamma: f64) -> PyResult<f64> {
    Ok(metrics::conditional_ber(&scheme(modulation)?, gamma))
}

#[pyfunction]
fn modulations() -> Vec<String> {
    ModulationRegistry::builtin().names().map(str::to_string).collect()
}

#[pyfunction]
fn db_to_linear(db: f64) -> f64 {
    egg::db_to_linear(db)
}

#[pymodule]
#[pyo3(name = "uwoc_relay")]
fn uwoc_relay_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEggParams>()?;
    m.add_class::<PyHop>()?;
    m.add_class::<PyRelay>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(combine_snr, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_ber, m)?)?;
    m.add_function(wrap_pyfunction!(modulations, m)?)?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add("UwocError", m.py().get_type::<UwocError>())?;
    m.add("ParameterDegenerateError", m.py().get_type::<ParameterDegenerateError>())?;
    Ok(())
}

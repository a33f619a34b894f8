//! Python bindings for `metrofold`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use metrofold::analysis;
use metrofold::cwalk;
use metrofold::init::{self, AngleGuess, InitKind, InitialDistribution, DEFAULT_KAPPA};
use metrofold::landscape::{self, EnergyLandscape, Grid, SyntheticKind};
use metrofold::qasm;
use metrofold::qwalk::{self, RegisterLayout};
use metrofold::schedule::{ScheduleKind, ScheduleSpec, DEFAULT_ALPHA, DEFAULT_BETA1, DEFAULT_FIXED_BETA};
use metrofold::spectral;

create_exception!(metrofold_py, MetrofoldError, PyValueError);

fn err(e: metrofold::Error) -> PyErr {
    MetrofoldError::new_err(format!("{}: {e}", e.kind()))
}

fn parse<T: std::str::FromStr<Err = metrofold::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

#[pyclass(name = "Landscape", module = "metrofold_py", frozen)]
struct PyLandscape {
    inner: EnergyLandscape,
}

#[pymethods]
impl PyLandscape {
    #[new]
    #[pyo3(signature = (name, n_angles, bits, energies, true_angle_indices=None))]
    fn new(
        name: String,
        n_angles: usize,
        bits: u32,
        energies: Vec<f64>,
        true_angle_indices: Option<Vec<usize>>,
    ) -> PyResult<Self> {
        let grid = Grid::new(n_angles, bits).map_err(err)?;
        let inner = EnergyLandscape::new(name, grid, energies, true_angle_indices).map_err(err)?;
        Ok(PyLandscape { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyLandscape {
            inner: EnergyLandscape::from_json_str(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyLandscape {
            inner: landscape::load_landscape(path).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, n_angles, bits, kind="dihedral_cosine"))]
    fn synthetic(seed: u64, n_angles: usize, bits: u32, kind: &str) -> PyResult<Self> {
        let kind: SyntheticKind = parse(kind)?;
        Ok(PyLandscape {
            inner: landscape::generate_synthetic(seed, n_angles, bits, kind).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json_string().map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn n_angles(&self) -> usize {
        self.inner.n_angles()
    }

    #[getter]
    fn bits(&self) -> u32 {
        self.inner.bits()
    }

    #[getter]
    fn space_size(&self) -> usize {
        self.inner.space_size()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.energies().to_vec()
    }

    #[getter]
    fn ground_index(&self) -> usize {
        self.inner.ground_index()
    }

    #[getter]
    fn ground_config(&self) -> Vec<usize> {
        self.inner.ground_config().indices
    }

    #[getter]
    fn true_angle_indices(&self) -> Option<Vec<usize>> {
        self.inner.true_angle_indices().map(<[usize]>::to_vec)
    }

    fn __len__(&self) -> usize {
        self.inner.space_size()
    }

    fn __repr__(&self) -> String {
        format!(
            "Landscape(name={:?}, n_angles={}, bits={})",
            self.inner.name(),
            self.inner.n_angles(),
            self.inner.bits()
        )
    }
}

#[pyclass(name = "Schedule", module = "metrofold_py", frozen)]
struct PySchedule {
    inner: ScheduleSpec,
}

#[pymethods]
impl PySchedule {
    /// `beta1` defaults to 1000 for `fixed` and 50 otherwise.
    #[new]
    #[pyo3(signature = (kind, beta1=None, alpha=DEFAULT_ALPHA, dimension=1))]
    fn new(kind: &str, beta1: Option<f64>, alpha: f64, dimension: usize) -> PyResult<Self> {
        let kind: ScheduleKind = parse(kind)?;
        let beta1 = beta1.unwrap_or(if kind == ScheduleKind::Fixed {
            DEFAULT_FIXED_BETA
        } else {
            DEFAULT_BETA1
        });
        Ok(PySchedule {
            inner: ScheduleSpec::new(kind, beta1, alpha, dimension).map_err(err)?,
        })
    }

    #[staticmethod]
    fn fixed(beta: f64) -> PyResult<Self> {
        Ok(PySchedule {
            inner: ScheduleSpec::fixed(beta).map_err(err)?,
        })
    }

    fn beta_at(&self, t: usize) -> PyResult<f64> {
        self.inner.beta_at(t).map_err(err)
    }

    fn betas(&self, steps: usize) -> Vec<f64> {
        self.inner.betas(steps)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn beta1(&self) -> f64 {
        self.inner.beta1
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    fn __repr__(&self) -> String {
        format!(
            "Schedule(kind={:?}, beta1={}, alpha={}, dimension={})",
            self.inner.kind.name(),
            self.inner.beta1,
            self.inner.alpha,
            self.inner.dimension
        )
    }
}

fn initial(
    l: &EnergyLandscape,
    kind: &str,
    means: Option<Vec<f64>>,
    kappa: f64,
) -> PyResult<InitialDistribution> {
    let kind: InitKind = parse(kind)?;
    let guess = means
        .map(|m| AngleGuess::new(m, kappa))
        .transpose()
        .map_err(err)?;
    init::build_initial(kind, l, guess.as_ref()).map_err(err)
}

/// Initial probability mass over flat configurations.
#[pyfunction]
#[pyo3(signature = (landscape, init="uniform", means=None, kappa=DEFAULT_KAPPA))]
fn initial_distribution(
    landscape: &PyLandscape,
    init: &str,
    means: Option<Vec<f64>>,
    kappa: f64,
) -> PyResult<Vec<f64>> {
    Ok(initial(&landscape.inner, init, means, kappa)?.pmf)
}

/// Exact classical ground-state probability after each step.
#[pyfunction]
#[pyo3(signature = (landscape, schedule, steps, init="uniform", means=None, kappa=DEFAULT_KAPPA))]
fn propagate_exact(
    py: Python<'_>,
    landscape: &PyLandscape,
    schedule: &PySchedule,
    steps: usize,
    init: &str,
    means: Option<Vec<f64>>,
    kappa: f64,
) -> PyResult<Vec<f64>> {
    let start = initial(&landscape.inner, init, means, kappa)?;
    let (l, s) = (&landscape.inner, &schedule.inner);
    py.detach(|| cwalk::propagate_exact(&start, l, s, steps))
        .map_err(err)
}

/// Monte Carlo estimate `(p, stderr)`; `iterations` defaults to `500 * space_size`.
#[pyfunction]
#[pyo3(signature = (landscape, schedule, steps, iterations=None, seed=0, init="uniform", means=None, kappa=DEFAULT_KAPPA))]
#[allow(clippy::too_many_arguments)]
fn sample_walks(
    py: Python<'_>,
    landscape: &PyLandscape,
    schedule: &PySchedule,
    steps: usize,
    iterations: Option<usize>,
    seed: u64,
    init: &str,
    means: Option<Vec<f64>>,
    kappa: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let start = initial(&landscape.inner, init, means, kappa)?;
    let (l, s) = (&landscape.inner, &schedule.inner);
    let n = iterations.unwrap_or_else(|| cwalk::default_iterations(l));
    let r = py
        .detach(|| cwalk::sample_walks(&start, l, s, steps, n, seed))
        .map_err(err)?;
    Ok((r.p, r.stderr))
}

/// Quantum walk ground-configuration marginal after each step.
#[pyfunction]
#[pyo3(signature = (landscape, schedule, steps, init="uniform", means=None, kappa=DEFAULT_KAPPA, max_qubits=qwalk::DEFAULT_MAX_QUBITS))]
fn run_heuristic(
    py: Python<'_>,
    landscape: &PyLandscape,
    schedule: &PySchedule,
    steps: usize,
    init: &str,
    means: Option<Vec<f64>>,
    kappa: f64,
    max_qubits: u32,
) -> PyResult<Vec<f64>> {
    let l = &landscape.inner;
    let layout = RegisterLayout::for_grid(l.grid());
    qwalk::check_qubits(&layout, max_qubits).map_err(err)?;
    let start = initial(l, init, means, kappa)?;
    let state = init::amplitudes_from(&start, &layout).map_err(err)?;
    let s = &schedule.inner;
    py.detach(|| qwalk::run_heuristic_guarded(&state, l, s, steps, max_qubits))
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (t, p, delta_target=analysis::DEFAULT_DELTA_TARGET))]
fn tts(t: usize, p: f64, delta_target: f64) -> PyResult<f64> {
    analysis::tts(t, p, delta_target).map_err(err)
}

/// `(min_tts, argmin_t)` over `t_min..=t_max`; `series[0]` is step 1.
#[pyfunction]
#[pyo3(signature = (series, t_min=analysis::DEFAULT_T_MIN, t_max=analysis::DEFAULT_T_MAX, delta_target=analysis::DEFAULT_DELTA_TARGET))]
fn min_tts(series: Vec<f64>, t_min: usize, t_max: usize, delta_target: f64) -> PyResult<(f64, usize)> {
    analysis::min_tts(&series, t_min, t_max, delta_target).map_err(err)
}

/// `(slope, intercept, r_squared)` of `log10 y` against `log10 x`.
#[pyfunction]
fn loglog_fit(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let f = analysis::loglog_fit(&points).map_err(err)?;
    Ok((f.slope, f.intercept, f.r_squared))
}

#[pyfunction]
fn extrapolate_speedup(e: f64, r: f64, n_angles: usize, bits: u32) -> PyResult<f64> {
    analysis::extrapolate_speedup(e, r, n_angles, bits).map_err(err)
}

/// `(t_statistic, p_value, degrees_of_freedom)` of the Welch test.
#[pyfunction]
fn two_proportion_test(
    successes_a: u64,
    trials_a: u64,
    successes_b: u64,
    trials_b: u64,
) -> PyResult<(f64, f64, f64)> {
    let r = analysis::two_proportion_test(successes_a, trials_a, successes_b, trials_b).map_err(err)?;
    Ok((r.t_statistic, r.p_value, r.degrees_of_freedom))
}

/// `(openqasm_text, grouping_error)` for a two-angle, one-bit landscape.
#[pyfunction]
#[pyo3(signature = (landscape, beta1_step=0.1, beta2_step=1.0, tolerance=0.0))]
fn export_qasm(
    landscape: &PyLandscape,
    beta1_step: f64,
    beta2_step: f64,
    tolerance: f64,
) -> PyResult<(String, f64)> {
    let spec = qasm::HardwareCircuitSpec::new(landscape.inner.clone(), (beta1_step, beta2_step), tolerance)
        .map_err(err)?;
    let c = qasm::export_circuit(&spec).map_err(err)?;
    Ok((c.text, c.grouping_error))
}

/// Outcome distribution over `2 * phi + psi` of an OpenQASM program.
#[pyfunction]
fn simulate_qasm(text: &str) -> PyResult<Vec<f64>> {
    let prog = qasm::parse_qasm(text).map_err(err)?;
    Ok(qasm::simulate_configuration_marginal(&prog).map_err(err)?.to_vec())
}

#[pyfunction]
fn gibbs(landscape: &PyLandscape, beta: f64) -> Vec<f64> {
    spectral::gibbs(&landscape.inner, beta)
}

/// Spectral report of the Metropolis chain at fixed `beta` as a dict.
#[pyfunction]
fn classical_gap<'py>(py: Python<'py>, landscape: &PyLandscape, beta: f64) -> PyResult<Bound<'py, PyDict>> {
    let w = cwalk::build_transition_matrix(&landscape.inner, beta).map_err(err)?;
    let r = spectral::classical_gap(&w).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("beta", r.beta)?;
    d.set_item("eigenvalues", r.eigenvalues.clone())?;
    d.set_item("lambda1", r.lambda1())?;
    d.set_item("delta", r.delta)?;
    d.set_item("phase_gap", r.phase_gap)?;
    d.set_item("bounds_applicable", r.bounds_applicable)?;
    d.set_item("bounds_hold", r.bounds_hold)?;
    Ok(d)
}

#[pymodule]
pub fn metrofold_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MetrofoldError", m.py().get_type::<MetrofoldError>())?;
    m.add_class::<PyLandscape>()?;
    m.add_class::<PySchedule>()?;
    m.add_function(wrap_pyfunction!(initial_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_exact, m)?)?;
    m.add_function(wrap_pyfunction!(sample_walks, m)?)?;
    m.add_function(wrap_pyfunction!(run_heuristic, m)?)?;
    m.add_function(wrap_pyfunction!(tts, m)?)?;
    m.add_function(wrap_pyfunction!(min_tts, m)?)?;
    m.add_function(wrap_pyfunction!(loglog_fit, m)?)?;
    m.add_function(wrap_pyfunction!(extrapolate_speedup, m)?)?;
    m.add_function(wrap_pyfunction!(two_proportion_test, m)?)?;
    m.add_function(wrap_pyfunction!(export_qasm, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_qasm, m)?)?;
    m.add_function(wrap_pyfunction!(gibbs, m)?)?;
    m.add_function(wrap_pyfunction!(classical_gap, m)?)?;
    Ok(())
}

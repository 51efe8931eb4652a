//! Python bindings: grids, fields, the solver, observables, the pointwise
//! inequality checks and a few of the experiments.
//!
//! Experiment results come back as plain dicts.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lognls_core::experiments::{self, RandomFieldSpec, ZygmundNormalization, ZygmundOptions};
use lognls_core::nonlinearity::{self, SweepOptions};
use lognls_core::{evolution, snapshot, Complex64, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        e @ (Error::Diverged { .. } | Error::NonFinite { .. }) => {
            PyRuntimeError::new_err(e.to_string())
        }
        e => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(frozen, skip_from_py_object, module = "lognls")]
#[derive(Clone)]
struct Geometry(lognls_core::Geometry);

#[pymethods]
impl Geometry {
    /// Cubic torus of side `period` with `points` samples per axis.
    #[new]
    fn new(dim: usize, period: f64, points: usize) -> PyResult<Self> {
        lognls_core::Geometry::new(dim, period, points)
            .map(Geometry)
            .map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn periods(&self) -> Vec<f64> {
        self.0.periods().to_vec()
    }

    #[getter]
    fn points(&self) -> Vec<usize> {
        self.0.point_counts().to_vec()
    }

    #[getter]
    fn cell_volume(&self) -> f64 {
        self.0.cell_volume()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &Geometry) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!(
            "Geometry(dim={}, periods={:?}, points={:?})",
            self.0.dim(),
            self.0.periods(),
            self.0.point_counts()
        )
    }
}

/// Samples of a field on a grid, row-major, at a time stamp.
#[pyclass(frozen, skip_from_py_object, module = "lognls")]
#[derive(Clone)]
struct FieldState(lognls_core::FieldState);

#[pymethods]
impl FieldState {
    #[new]
    #[pyo3(signature = (geometry, values, time = 0.0))]
    fn new(geometry: &Geometry, values: Vec<Complex64>, time: f64) -> PyResult<Self> {
        lognls_core::FieldState::new(geometry.0, values, time)
            .map(FieldState)
            .map_err(to_py)
    }

    /// Random datum with power-law spectrum, rescaled to `||u||_{H^s} = norm`.
    #[staticmethod]
    #[pyo3(signature = (geometry, s = 1.0, norm = 1.0, seed = 0))]
    fn random(geometry: &Geometry, s: f64, norm: f64, seed: u64) -> PyResult<Self> {
        experiments::make_random_field(&RandomFieldSpec::new(s, norm, seed), &geometry.0)
            .map(FieldState)
            .map_err(to_py)
    }

    /// The Gausson of frequency `omega`, centred in the box.
    #[staticmethod]
    #[pyo3(signature = (geometry, lam, omega = 0.0))]
    fn gausson(geometry: &Geometry, lam: f64, omega: f64) -> PyResult<Self> {
        experiments::Gausson::new(omega, lam, geometry.0.dim())
            .and_then(|g| g.sample(&geometry.0))
            .map(FieldState)
            .map_err(to_py)
    }

    #[getter]
    fn geometry(&self) -> Geometry {
        Geometry(*self.0.geometry())
    }

    #[getter]
    fn time(&self) -> f64 {
        self.0.time()
    }

    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.0.values().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }

    fn __sub__(&self, other: &FieldState) -> PyResult<Self> {
        if self.0.geometry() != other.0.geometry() {
            return Err(PyValueError::new_err("fields live on different grids"));
        }
        Ok(FieldState(self.0.sub(&other.0)))
    }

    fn __repr__(&self) -> String {
        format!(
            "FieldState(dim={}, points={:?}, time={})",
            self.0.geometry().dim(),
            self.0.geometry().point_counts(),
            self.0.time()
        )
    }
}

/// `i u_t + Delta u + lam u log|u|^2 + mu |u|^alpha u = 0`, optionally
/// regularised at `u = 0`.
#[pyclass(frozen, skip_from_py_object, module = "lognls")]
#[derive(Clone)]
struct NonlinearitySpec(lognls_core::NonlinearitySpec);

#[pymethods]
impl NonlinearitySpec {
    #[new]
    #[pyo3(signature = (lam, mu = 0.0, alpha = 2.0, reg_family = "exact", epsilon = 0.0))]
    fn new(lam: f64, mu: f64, alpha: f64, reg_family: &str, epsilon: f64) -> PyResult<Self> {
        let family = reg_family.parse().map_err(PyValueError::new_err)?;
        let spec = lognls_core::NonlinearitySpec::exact(lam)
            .with_power(mu, alpha)
            .regularized(family, epsilon);
        spec.validate(None).map_err(to_py)?;
        Ok(NonlinearitySpec(spec))
    }

    /// Raises if the parameters are inadmissible in dimension `dim`.
    #[pyo3(signature = (dim = None))]
    fn validate(&self, dim: Option<usize>) -> PyResult<()> {
        self.0.validate(dim).map_err(to_py)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn reg_family(&self) -> &'static str {
        self.0.reg_family.name()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    fn __repr__(&self) -> String {
        format!(
            "NonlinearitySpec(lam={}, mu={}, alpha={}, reg_family={:?}, epsilon={})",
            self.0.lambda,
            self.0.mu,
            self.0.alpha,
            self.0.reg_family.name(),
            self.0.epsilon
        )
    }
}

#[pyclass(frozen, skip_from_py_object, module = "lognls")]
#[derive(Clone)]
struct SolverConfig(evolution::SolverConfig);

#[pymethods]
impl SolverConfig {
    /// `dt` is rounded so that it divides `t_final`.
    #[new]
    #[pyo3(signature = (dt, t_final, snapshot_every = 100, scheme = "strang", sobolev = vec![1.0]))]
    fn new(
        dt: f64,
        t_final: f64,
        snapshot_every: usize,
        scheme: &str,
        sobolev: Vec<f64>,
    ) -> PyResult<Self> {
        let scheme = scheme.parse().map_err(PyValueError::new_err)?;
        evolution::SolverConfig::new(scheme, dt, t_final, snapshot_every)
            .map(|c| SolverConfig(c.with_sobolev(&sobolev)))
            .map_err(to_py)
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.0.t_final
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps()
    }
}

#[pyclass(frozen, module = "lognls")]
struct Trajectory(evolution::Trajectory);

#[pymethods]
impl Trajectory {
    #[getter]
    fn snapshots(&self) -> Vec<FieldState> {
        self.0.snapshots.iter().cloned().map(FieldState).collect()
    }

    #[getter]
    fn final_state(&self) -> FieldState {
        FieldState(self.0.final_state().clone())
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.observables.iter().map(|o| o.time).collect()
    }

    #[getter]
    fn charges(&self) -> Vec<f64> {
        self.0.observables.iter().map(|o| o.charge).collect()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.0.observables.iter().map(|o| o.energy).collect()
    }

    /// `{s: [||u(t)||_{H^s} for each snapshot]}`.
    #[getter]
    fn sobolev<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        if let Some(first) = self.0.observables.first() {
            for (k, (s, _)) in first.sobolev.iter().enumerate() {
                let norms: Vec<f64> = self.0.observables.iter().map(|o| o.sobolev[k].1).collect();
                out.set_item(s, norms)?;
            }
        }
        Ok(out)
    }

    #[getter]
    fn phase_overflows(&self) -> u64 {
        self.0.phase_overflows
    }

    fn __len__(&self) -> usize {
        self.0.snapshots.len()
    }
}

#[pyfunction]
fn evolve(
    py: Python<'_>,
    u0: &FieldState,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
) -> PyResult<Trajectory> {
    let (u0, spec, config) = (&u0.0, &spec.0, &config.0);
    py.detach(|| evolution::evolve(u0, spec, config))
        .map(Trajectory)
        .map_err(to_py)
}

/// `||u||_{L^2}^2`.
#[pyfunction]
fn charge(state: &FieldState) -> f64 {
    evolution::charge(&state.0)
}

#[pyfunction]
fn energy(state: &FieldState, spec: &NonlinearitySpec) -> f64 {
    evolution::energy(&state.0, &spec.0)
}

#[pyfunction]
fn check_ch(z: Complex64, w: Complex64) -> f64 {
    nonlinearity::check_ch(z, w)
}

#[pyfunction]
fn check_lemma31_g1(z: Complex64, w: Complex64, delta: f64, lam: f64) -> f64 {
    nonlinearity::check_lemma31_g1(z, w, delta, lam)
}

#[pyfunction]
fn check_eq32_g2(z: Complex64, w: Complex64, lam: f64) -> f64 {
    nonlinearity::check_eq32_g2(z, w, lam)
}

fn ineq_dict<'py>(py: Python<'py>, r: &nonlinearity::IneqReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("inequality", &r.inequality)?;
    d.set_item("delta", r.delta)?;
    d.set_item("samples", r.samples)?;
    d.set_item("max_ratio", r.max_ratio)?;
    d.set_item("argmax", r.argmax.to_vec())?;
    d.set_item("violations", r.violations)?;
    Ok(d)
}

/// Random and structured pairs with moduli in `[min_modulus, max_modulus]`.
#[pyfunction]
#[pyo3(signature = (inequality, samples = 100_000, seed = 0, min_modulus = 1e-12, max_modulus = 1e12, delta = 0.1, lam = 1.0))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    inequality: &str,
    samples: usize,
    seed: u64,
    min_modulus: f64,
    max_modulus: f64,
    delta: f64,
    lam: f64,
) -> PyResult<Bound<'py, PyDict>> {
    if !(min_modulus > 0.0 && min_modulus < max_modulus) {
        return Err(PyValueError::new_err("need 0 < min_modulus < max_modulus"));
    }
    let opts = SweepOptions::new(samples, seed, min_modulus, max_modulus);
    let report = py.detach(|| match inequality {
        "ch" => Ok(nonlinearity::sweep_ch(&opts)),
        "lemma31" => Ok(nonlinearity::sweep_lemma31(delta, lam, &opts)),
        "eq32" => Ok(nonlinearity::sweep_eq32(lam, &opts)),
        other => Err(format!(
            "unknown inequality `{other}` (expected ch, lemma31 or eq32)"
        )),
    });
    ineq_dict(py, &report.map_err(PyValueError::new_err)?)
}

/// Evolves `u0` and `v0` together and compares their distance with the
/// exponential bound.
#[pyfunction]
#[pyo3(signature = (u0, v0, spec, config, tol = 0.05))]
fn stability<'py>(
    py: Python<'py>,
    u0: &FieldState,
    v0: &FieldState,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (u, v, s, c) = (&u0.0, &v0.0, &spec.0, &config.0);
    let r = py
        .detach(|| experiments::stability_experiment(u, v, s, c, tol))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("times", r.times)?;
    d.set_item("ratios", r.ratios)?;
    d.set_item("weighted", r.weighted)?;
    d.set_item("sup_weighted", r.sup_weighted)?;
    d.set_item("bound_m", r.bound.m)?;
    d.set_item("charge_drift_rate", r.charge_drift_rate)?;
    d.set_item("verdict", r.verdict)?;
    Ok(d)
}

/// Relative deviation of the evolved Gausson from the standing wave.
#[pyfunction]
#[pyo3(signature = (geometry, lam, config, omega = 0.0))]
fn gausson<'py>(
    py: Python<'py>,
    geometry: &Geometry,
    lam: f64,
    config: &SolverConfig,
    omega: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (g, c) = (&geometry.0, &config.0);
    let r = py
        .detach(|| experiments::gausson_experiment(omega, lam, g, c))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("final_error", r.final_error())?;
    d.set_item("times", r.times)?;
    d.set_item("errors", r.errors)?;
    d.set_item("charge_drift", r.charge_drift)?;
    Ok(d)
}

/// Space-time `L^4` ratio on `[0, 1] x T` across resolutions.
#[pyfunction]
#[pyo3(signature = (resolutions, samples = 50, seed = 0, normalization = "l2"))]
fn zygmund<'py>(
    py: Python<'py>,
    resolutions: Vec<usize>,
    samples: usize,
    seed: u64,
    normalization: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let options = ZygmundOptions {
        samples,
        seed,
        normalization: normalization
            .parse::<ZygmundNormalization>()
            .map_err(PyValueError::new_err)?,
        ..ZygmundOptions::default()
    };
    let r = py
        .detach(|| experiments::zygmund_scan(&resolutions, &options))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("resolutions", r.scan.values)?;
    d.set_item("ratios", r.scan.measured)?;
    d.set_item("slope", r.scan.slope)?;
    d.set_item("growth", r.growth)?;
    d.set_item("verdict", r.verdict)?;
    Ok(d)
}

#[pyfunction]
fn gronwall_bound(a: f64, b: f64, delta: f64, t: f64) -> f64 {
    experiments::gronwall_bound(a, b, delta, t)
}

#[pyfunction]
fn write_snapshot(path: PathBuf, state: &FieldState, spec: &NonlinearitySpec) -> PyResult<()> {
    let file =
        File::create(&path).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    snapshot::write_snapshot(&mut out, &state.0, &spec.0).map_err(to_py)?;
    out.flush().map_err(|e| PyOSError::new_err(e.to_string()))
}

/// Returns `(state, spec)`; the file does not record the regularisation.
#[pyfunction]
fn read_snapshot(path: PathBuf) -> PyResult<(FieldState, NonlinearitySpec)> {
    let file =
        File::open(&path).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
    let (header, state) = snapshot::read_snapshot(BufReader::new(file)).map_err(to_py)?;
    let spec =
        lognls_core::NonlinearitySpec::exact(header.lambda).with_power(header.mu, header.alpha);
    Ok((FieldState(state), NonlinearitySpec(spec)))
}

#[pymodule]
fn lognls(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Geometry>()?;
    m.add_class::<FieldState>()?;
    m.add_class::<NonlinearitySpec>()?;
    m.add_class::<SolverConfig>()?;
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(charge, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(check_ch, m)?)?;
    m.add_function(wrap_pyfunction!(check_lemma31_g1, m)?)?;
    m.add_function(wrap_pyfunction!(check_eq32_g2, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(stability, m)?)?;
    m.add_function(wrap_pyfunction!(gausson, m)?)?;
    m.add_function(wrap_pyfunction!(zygmund, m)?)?;
    m.add_function(wrap_pyfunction!(gronwall_bound, m)?)?;
    m.add_function(wrap_pyfunction!(write_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot, m)?)?;
    Ok(())
}

//! Python bindings for the elliptic-shooter core library.

use elliptic_shooter_core as core;
use elliptic_shooter_core::dual::{DiffusionFamily, DiffusionModel as CoreDiffusion};
use elliptic_shooter_core::nonlinearity::Family;
use elliptic_shooter_core::spectrum::default_r_max;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::{Map, Value};

create_exception!(elliptic_shooter, ShooterError, PyRuntimeError);

fn py_err(e: core::Error) -> PyErr {
    match e {
        core::Error::Config(_)
        | core::Error::Parse { .. }
        | core::Error::Domain { .. }
        | core::Error::Precondition(_)
        | core::Error::Resolution { .. } => PyValueError::new_err(e.to_string()),
        _ => ShooterError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Converts a JSON value into plain Python objects.
pub fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(to_py(py, x)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(o) => {
            let dict = PyDict::new(py);
            for (k, x) in o {
                dict.set_item(k, to_py(py, x)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn report<'py, T: serde::Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(x).map_err(json_err)?)
}

fn params_of(params: Option<&Bound<'_, PyDict>>) -> PyResult<Value> {
    let mut map = Map::new();
    if let Some(d) = params {
        for (k, v) in d.iter() {
            let key: String = k.extract()?;
            let value = if let Ok(x) = v.extract::<f64>() {
                Value::from(x)
            } else {
                Value::from(v.extract::<String>()?)
            };
            map.insert(key, value);
        }
    }
    Ok(Value::Object(map))
}

fn grid(lo: f64, hi: f64, per_decade: usize) -> core::GridSpec {
    core::GridSpec { lo, hi, per_decade }
}

/// Semilinear nonlinearity `g`.
#[pyclass(frozen, module = "elliptic_shooter")]
pub struct SemilinearModel {
    inner: core::SemilinearModel,
}

#[pymethods]
impl SemilinearModel {
    /// Builtin family by name, e.g. `SemilinearModel("power", lambda_=1, p=3)`.
    #[new]
    #[pyo3(signature = (family, **params))]
    fn new(family: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut p = params_of(params)?;
        if let Some(l) = p.as_object_mut().and_then(|m| m.remove("lambda_")) {
            p["lambda"] = l;
        }
        let inner = core::SemilinearModel::builtin(Family::from_name(family, &p).map_err(py_err)?);
        Ok(Self { inner })
    }

    /// `g`, `g′` and `G` given as expressions in `s`.
    #[staticmethod]
    fn from_exprs(g: &str, g_prime: &str, g_anti: &str) -> PyResult<Self> {
        let inner = core::SemilinearModel::from_exprs(g, g_prime, g_anti).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn g(&self, s: f64) -> f64 {
        self.inner.g(s)
    }

    fn g_prime(&self, s: f64) -> f64 {
        self.inner.g_prime(s)
    }

    fn g_anti(&self, s: f64) -> f64 {
        self.inner.g_anti(s)
    }

    /// Structural constants `b`, `b̃`, `ζ`, `s*`, `K_∞`.
    #[pyo3(signature = (search_bound = 1e8))]
    fn constants<'py>(&self, py: Python<'py>, search_bound: f64) -> PyResult<Bound<'py, PyAny>> {
        let c = core::structural_constants(&self.inner, search_bound).map_err(py_err)?;
        report(py, &c)
    }

    fn __repr__(&self) -> String {
        format!("SemilinearModel({})", self.inner.label())
    }
}

/// Diffusion coefficient `a` of a quasilinear problem.
#[pyclass(frozen, module = "elliptic_shooter")]
pub struct DiffusionModel {
    inner: CoreDiffusion,
}

#[pymethods]
impl DiffusionModel {
    #[new]
    #[pyo3(signature = (family, **params))]
    fn new(family: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let p = params_of(params)?;
        let f = DiffusionFamily::from_name(family, &p).map_err(py_err)?;
        Ok(Self {
            inner: CoreDiffusion::builtin(f),
        })
    }

    /// `a(t) = 1 + 2κt²`.
    #[staticmethod]
    fn mnls(kappa: f64) -> Self {
        Self {
            inner: CoreDiffusion::mnls(kappa),
        }
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    fn a(&self, t: f64) -> f64 {
        self.inner.a(t)
    }

    fn a_prime(&self, t: f64) -> f64 {
        self.inner.a_prime(t)
    }

    fn __repr__(&self) -> String {
        format!("DiffusionModel({})", self.inner.label())
    }
}

/// A computed ground state.
#[pyclass(frozen, module = "elliptic_shooter")]
pub struct GroundState {
    inner: core::GroundState,
    constants: core::StructuralConstants,
}

#[pymethods]
impl GroundState {
    #[getter]
    fn d0(&self) -> f64 {
        self.inner.d0
    }

    #[getter]
    fn bracket(&self) -> (f64, f64) {
        (self.inner.bracket[0], self.inner.bracket[1])
    }

    #[getter]
    fn r_delta(&self) -> Option<f64> {
        self.inner.r_delta
    }

    #[getter]
    fn r_trust(&self) -> f64 {
        self.inner.r_trust
    }

    #[getter]
    fn r_max(&self) -> f64 {
        self.inner.r_max
    }

    #[getter]
    fn decay_rate(&self) -> Option<f64> {
        self.inner.decay.map(|d| d.rate)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.problem().dim
    }

    fn u(&self, r: f64) -> f64 {
        self.inner.u(r)
    }

    fn u_prime(&self, r: f64) -> f64 {
        self.inner.u_prime(r)
    }

    /// Trajectory nodes up to the trust radius: `r`, `u`, `u_prime`, `delta`.
    fn profile<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = &self.inner.trajectory;
        let n = t
            .nodes
            .iter()
            .take_while(|&&r| r <= self.inner.r_trust)
            .count();
        let d = PyDict::new(py);
        d.set_item("r", &t.nodes[..n])?;
        d.set_item("u", &t.u[..n])?;
        d.set_item("u_prime", &t.u_prime[..n])?;
        d.set_item("delta", &t.delta[..n])?;
        Ok(d)
    }

    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &self.constants)
    }

    fn nondegeneracy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &core::nondegeneracy_check(&self.inner).map_err(py_err)?)
    }

    fn key_lemma<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(
            py,
            &core::key_lemma_report(&self.inner, &self.constants).map_err(py_err)?,
        )
    }

    /// Sector spectra of the linearized operator.
    #[pyo3(signature = (mesh_n = 4000, r_max = None))]
    fn spectrum<'py>(
        &self,
        py: Python<'py>,
        mesh_n: usize,
        r_max: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let r_max = r_max.unwrap_or_else(|| default_r_max(&self.inner));
        let rep = py
            .detach(|| core::ground_spectral_report(&self.inner, mesh_n, r_max))
            .map_err(py_err)?;
        report(py, &rep)
    }

    fn __repr__(&self) -> String {
        format!(
            "GroundState(d0={}, N={}, r_delta={:?})",
            self.inner.d0,
            self.inner.problem().dim,
            self.inner.r_delta
        )
    }
}

/// Quasilinear ground state `u = f(v)` with its dual ground state `v`.
#[pyclass(frozen, module = "elliptic_shooter")]
pub struct QuasilinearSolution {
    inner: core::QuasilinearSolution,
    h: core::SemilinearModel,
    a: CoreDiffusion,
}

#[pymethods]
impl QuasilinearSolution {
    #[getter]
    fn u0(&self) -> f64 {
        self.inner.u0()
    }

    #[getter]
    fn v0(&self) -> f64 {
        self.inner.dual.d0
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual_nodes
    }

    #[getter]
    fn residual_midpoints(&self) -> f64 {
        self.inner.residual_midpoints
    }

    #[getter]
    fn k_infty(&self) -> f64 {
        self.inner.dual_constants.k_infty
    }

    /// The dual semilinear ground state.
    fn dual(&self) -> GroundState {
        GroundState {
            inner: self.inner.dual.clone(),
            constants: self.inner.dual_constants.clone(),
        }
    }

    fn u_at(&self, r: f64) -> PyResult<f64> {
        self.inner.u_at(r).map_err(py_err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    /// Kernel checks of the real and imaginary linearized mNLS operators.
    #[pyo3(signature = (mesh_n = 4000, r_max = None))]
    fn mnls_kernels<'py>(
        &self,
        py: Python<'py>,
        mesh_n: usize,
        r_max: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (lambda, kappa, p) = match (self.h.family(), self.a.family()) {
            (Some(Family::Power { lambda, p }), Some(DiffusionFamily::Mnls { kappa })) => {
                (lambda, kappa, p)
            }
            _ => {
                return Err(PyValueError::new_err(
                    "mnls kernels need an mnls diffusion and a power model",
                ))
            }
        };
        let r_max = r_max.unwrap_or_else(|| default_r_max(&self.inner.dual));
        let rep = py
            .detach(|| core::mnls_kernel_report(&self.inner, lambda, kappa, p, mesh_n, r_max))
            .map_err(py_err)?;
        report(py, &rep)
    }
}

fn options(
    problem: &core::RadialProblem,
    d_tol: f64,
    ode_tol: f64,
    r_max_factor: Option<f64>,
) -> core::ShootingOptions {
    core::ShootingOptions {
        d_tol,
        ode_tol,
        r_max: r_max_factor.map(|f| f * problem.default_r_max()),
    }
}

/// Ground state of `Δu + g(u) = 0` in dimension `dim` by shooting.
#[pyfunction]
#[pyo3(signature = (model, dim = 3, d_tol = 1e-12, ode_tol = 1e-10, r_max_factor = 1.0))]
fn find_ground_state(
    py: Python<'_>,
    model: &SemilinearModel,
    dim: usize,
    d_tol: f64,
    ode_tol: f64,
    r_max_factor: f64,
) -> PyResult<GroundState> {
    let m = model.inner.clone();
    py.detach(move || {
        let constants = core::structural_constants(&m, 1e8)?;
        let problem = core::RadialProblem::new(dim, m)?;
        let opts = options(&problem, d_tol, ode_tol, Some(r_max_factor));
        let inner = core::find_ground_state_with(&problem, &constants, &opts)?;
        Ok(GroundState { inner, constants })
    })
    .map_err(py_err)
}

/// Classification of the initial height `d`.
#[pyfunction]
#[pyo3(signature = (model, d, dim = 3, ode_tol = 1e-10, r_max_factor = 1.0))]
fn classify<'py>(
    py: Python<'py>,
    model: &SemilinearModel,
    d: f64,
    dim: usize,
    ode_tol: f64,
    r_max_factor: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let consts = core::structural_constants(&model.inner, 1e8).map_err(py_err)?;
    let problem = core::RadialProblem::new(dim, model.inner.clone()).map_err(py_err)?;
    let r_max = r_max_factor * problem.default_r_max();
    let c = core::classify(&problem, &consts, d, r_max, ode_tol).map_err(py_err)?;
    report(py, &c)
}

/// Conditions on `g` over a log-spaced grid.
#[pyfunction]
#[pyo3(signature = (model, dim = 3, lo = 1e-8, hi = 1e8, per_decade = 10000))]
fn check_semilinear<'py>(
    py: Python<'py>,
    model: &SemilinearModel,
    dim: usize,
    lo: f64,
    hi: f64,
    per_decade: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = core::check_semilinear_model(&model.inner, &grid(lo, hi, per_decade), dim)
        .map_err(py_err)?;
    report(py, &rep)
}

/// Conditions on `a` and `h` over a log-spaced grid.
#[pyfunction]
#[pyo3(signature = (diffusion, model, dim = 3, lo = 1e-8, hi = 1e8, per_decade = 10000))]
fn check_quasilinear<'py>(
    py: Python<'py>,
    diffusion: &DiffusionModel,
    model: &SemilinearModel,
    dim: usize,
    lo: f64,
    hi: f64,
    per_decade: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = core::check_quasilinear(
        &diffusion.inner,
        &model.inner,
        &grid(lo, hi, per_decade),
        dim,
    )
    .map_err(py_err)?;
    report(py, &rep)
}

/// Quasilinear ground state through the dual semilinear problem.
#[pyfunction]
#[pyo3(signature = (diffusion, model, dim = 3, d_tol = 1e-12, ode_tol = 1e-10))]
fn solve_quasilinear(
    py: Python<'_>,
    diffusion: &DiffusionModel,
    model: &SemilinearModel,
    dim: usize,
    d_tol: f64,
    ode_tol: f64,
) -> PyResult<QuasilinearSolution> {
    let a = diffusion.inner.clone();
    let h = model.inner.clone();
    py.detach(move || {
        let opts = core::ShootingOptions {
            d_tol,
            ode_tol,
            r_max: None,
        };
        let inner = core::solve_quasilinear(&a, &h, dim, &opts)?;
        Ok(QuasilinearSolution { inner, h, a })
    })
    .map_err(py_err)
}

#[pymodule]
fn elliptic_shooter(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds the classes, functions and exception type to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ShooterError", m.py().get_type::<ShooterError>())?;
    m.add_class::<SemilinearModel>()?;
    m.add_class::<DiffusionModel>()?;
    m.add_class::<GroundState>()?;
    m.add_class::<QuasilinearSolution>()?;
    m.add_function(wrap_pyfunction!(find_ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(check_semilinear, m)?)?;
    m.add_function(wrap_pyfunction!(check_quasilinear, m)?)?;
    m.add_function(wrap_pyfunction!(solve_quasilinear, m)?)?;
    Ok(())
}

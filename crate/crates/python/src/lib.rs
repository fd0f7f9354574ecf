//! Python bindings for the decaylab core.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use decaylab::decayfit;
use decaylab::evolution::{self, EvolveOptions, Propagator};
use decaylab::potential::{self, ModelSpec};
use decaylab::scattering;
use decaylab::semiclassical;
use decaylab::timedomain::{self, FdConfig, FdData};
use decaylab::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_)
        | Error::InvalidModel(_)
        | Error::InvalidFdConfig(_)
        | Error::NotInRegime(_)
        | Error::BelowFloor { .. }
        | Error::TheoremNotApplicable(_)
        | Error::InsufficientData(_)
        | Error::ResonantModel => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Serializable values cross into Python through json.loads.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn propagator(name: &str) -> PyResult<Propagator> {
    serde_json::from_value(serde_json::json!(name))
        .map_err(|_| PyValueError::new_err(format!("unknown propagator {name:?}; use cosine, sinc or schrodinger")))
}

#[pyclass(frozen, name = "PotentialModel")]
struct PyModel {
    inner: potential::PotentialModel,
}

#[pymethods]
impl PyModel {
    /// Build from a JSON model spec, e.g. '{"family": "regge_wheeler", "mass": 1, "ell": 0, "sigma": 1}'.
    #[staticmethod]
    fn from_json(spec: &str) -> PyResult<Self> {
        let spec: ModelSpec = serde_json::from_str(spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner: potential::PotentialModel::new(spec).map_err(err)? })
    }

    #[staticmethod]
    fn free() -> Self {
        Self { inner: potential::PotentialModel::free() }
    }

    #[staticmethod]
    #[pyo3(signature = (ell, sigma, mass = 1.0))]
    fn regge_wheeler(ell: u32, sigma: i32, mass: f64) -> PyResult<Self> {
        Ok(Self { inner: potential::PotentialModel::regge_wheeler(mass, ell, sigma).map_err(err)? })
    }

    #[staticmethod]
    fn inverse_square_model(a: f64) -> PyResult<Self> {
        Ok(Self { inner: potential::PotentialModel::inverse_square_model(a).map_err(err)? })
    }

    #[staticmethod]
    fn surface_of_revolution(ell: u32) -> PyResult<Self> {
        Ok(Self { inner: potential::PotentialModel::surface_of_revolution(ell).map_err(err)? })
    }

    #[staticmethod]
    fn inverse_square_barrier(strength: f64) -> PyResult<Self> {
        Ok(Self { inner: potential::PotentialModel::inverse_square_barrier(strength).map_err(err)? })
    }

    #[staticmethod]
    fn tabulated(x: Vec<f64>, v: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: potential::PotentialModel::tabulated(x, v).map_err(err)? })
    }

    fn evaluate(&self, x: f64) -> f64 {
        self.inner.evaluate(x)
    }

    fn evaluate_many(&self, xs: Vec<f64>) -> Vec<f64> {
        xs.into_iter().map(|x| self.inner.evaluate(x)).collect()
    }

    /// (left, right) tail classes as dicts.
    fn tails<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let t = self.inner.tails().map_err(err)?;
        to_py(py, &t)
    }

    fn spec<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, self.inner.spec())
    }

    fn __repr__(&self) -> String {
        format!("PotentialModel({:?})", self.inner.spec())
    }
}

#[pyclass(frozen, name = "SourceData")]
struct PySource {
    inner: evolution::SourceData,
}

#[pymethods]
impl PySource {
    #[staticmethod]
    #[pyo3(signature = (center = 0.0, width = 1.0, amplitude = 1.0))]
    fn gaussian(center: f64, width: f64, amplitude: f64) -> Self {
        Self { inner: evolution::SourceData::gaussian(center, width, amplitude) }
    }

    #[staticmethod]
    #[pyo3(signature = (center = 0.0, width = 1.0, amplitude = 1.0))]
    fn doublet(center: f64, width: f64, amplitude: f64) -> Self {
        Self { inner: evolution::SourceData::doublet(center, width, amplitude) }
    }

    #[staticmethod]
    #[pyo3(signature = (center = 0.0, width = 1.0, amplitude = 1.0))]
    fn compact(center: f64, width: f64, amplitude: f64) -> Self {
        Self { inner: evolution::SourceData::compact(center, width, amplitude) }
    }

    fn eval(&self, y: f64) -> f64 {
        self.inner.eval(y)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn dalembert_sinc(&self, t: f64, x: f64) -> f64 {
        self.inner.dalembert_sinc(t, x)
    }

    fn __repr__(&self) -> String {
        format!("SourceData({:?})", self.inner)
    }
}

#[pyclass(frozen, name = "WaveField")]
struct PyField {
    inner: evolution::WaveField,
}

#[pymethods]
impl PyField {
    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.t.clone()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x.clone()
    }

    /// values[i][j] pairs t[i] with x[j].
    #[getter]
    fn values(&self) -> Vec<Vec<Complex64>> {
        self.inner.values.clone()
    }

    #[getter]
    fn diagnostics(&self) -> std::collections::BTreeMap<String, f64> {
        self.inner.diagnostics.clone()
    }

    #[getter]
    fn propagator(&self) -> String {
        serde_json::to_value(self.inner.propagator).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }

    /// [(t, Re ψ)] at station index j.
    fn station(&self, j: usize) -> PyResult<Vec<(f64, f64)>> {
        if j >= self.inner.x.len() {
            return Err(PyValueError::new_err(format!("station index {j} out of range")));
        }
        Ok(self.inner.station(j))
    }
}

/// Dict with t, r_plus, r_minus, w (complex) and unitarity_defect.
#[pyfunction]
fn transmission_reflection<'py>(py: Python<'py>, model: &PyModel, lam: f64) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let s = scattering::transmission_reflection(&model.inner, lam).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("lambda", s.lambda)?;
    d.set_item("t", s.t)?;
    d.set_item("r_plus", s.r_plus)?;
    d.set_item("r_minus", s.r_minus)?;
    d.set_item("w", s.w)?;
    d.set_item("unitarity_defect", s.unitarity_defect())?;
    Ok(d)
}

#[pyfunction]
fn detect_zero_resonance<'py>(py: Python<'py>, model: &PyModel) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &scattering::detect_zero_resonance(&model.inner).map_err(err)?)
}

/// (c, p) of |W(λ)| ≈ c·λ^p; refuses resonant models.
#[pyfunction]
fn wronskian_smalllambda_fit(model: &PyModel, lambdas: Vec<f64>) -> PyResult<(f64, f64)> {
    let f = scattering::wronskian_smalllambda_fit(&model.inner, &lambdas).map_err(err)?;
    Ok((f.c, f.p))
}

#[pyfunction]
#[pyo3(signature = (model, propagator, data, t, x, budget = 1e-5))]
fn evolve(
    py: Python<'_>,
    model: &PyModel,
    propagator: &str,
    data: &PySource,
    t: Vec<f64>,
    x: Vec<f64>,
    budget: f64,
) -> PyResult<PyField> {
    let p = self::propagator(propagator)?;
    let opts = EvolveOptions { budget, ..EvolveOptions::default() };
    let field = py.detach(|| evolution::evolve(&model.inner, p, &data.inner, &t, &x, &opts)).map_err(err)?;
    Ok(PyField { inner: field })
}

/// Leapfrog run; "sinc" uses `data` as initial velocity, "cosine" as initial value.
#[pyfunction]
#[pyo3(signature = (model, data, h, t_final, stations, propagator = "sinc", courant = 0.9))]
fn fd_evolve(
    py: Python<'_>,
    model: &PyModel,
    data: &PySource,
    h: f64,
    t_final: f64,
    stations: Vec<f64>,
    propagator: &str,
    courant: f64,
) -> PyResult<PyField> {
    let fd = match self::propagator(propagator)? {
        Propagator::Sinc => FdData::velocity(data.inner),
        Propagator::Cosine => FdData::value(data.inner),
        _ => return Err(PyValueError::new_err("finite differences support sinc and cosine")),
    };
    let cfg = FdConfig { courant, ..FdConfig::new(h, t_final) };
    let field = py.detach(|| timedomain::fd_evolve(&model.inner, &fd, &cfg, &stations)).map_err(err)?;
    Ok(PyField { inner: field })
}

#[pyfunction]
#[pyo3(signature = (series, station, window, min_t_lo = 50.0))]
fn fit_power_law<'py>(
    py: Python<'py>,
    series: Vec<(f64, f64)>,
    station: f64,
    window: (f64, f64),
    min_t_lo: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = decayfit::fit_power_law(&series, station, window, &decayfit::FitOptions { min_t_lo }).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn theory_exponent<'py>(py: Python<'py>, model: &PyModel, propagator: &str, data_mean_zero: bool) -> PyResult<Bound<'py, PyAny>> {
    let p = self::propagator(propagator)?;
    to_py(py, &decayfit::theory_exponent(&model.inner, p, data_mean_zero).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (model, e, hbar, corrected = true))]
fn action_integrals<'py>(py: Python<'py>, model: &PyModel, e: f64, hbar: f64, corrected: bool) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &semiclassical::action_integrals(&model.inner, e, hbar, corrected).map_err(err)?)
}

/// (e^{−S/ħ}, exact |T|, relative deviation).
#[pyfunction]
#[pyo3(signature = (model, e, hbar, corrected = true))]
fn wkb_vs_exact(model: &PyModel, e: f64, hbar: f64, corrected: bool) -> PyResult<(f64, f64, f64)> {
    semiclassical::wkb_vs_exact(&model.inner, e, hbar, corrected).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, t, eps = 0.1))]
fn model_watson_integral(a: f64, t: f64, eps: f64) -> Complex64 {
    evolution::model_watson_integral(a, t, eps)
}

#[pymodule]
#[pyo3(name = "decaylab")]
fn decaylab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PySource>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(transmission_reflection, m)?)?;
    m.add_function(wrap_pyfunction!(detect_zero_resonance, m)?)?;
    m.add_function(wrap_pyfunction!(wronskian_smalllambda_fit, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(fd_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(theory_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(action_integrals, m)?)?;
    m.add_function(wrap_pyfunction!(wkb_vs_exact, m)?)?;
    m.add_function(wrap_pyfunction!(model_watson_integral, m)?)?;
    Ok(())
}

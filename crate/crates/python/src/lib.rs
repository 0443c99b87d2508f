//! Python bindings for `lp_bellman`.

use lp_bellman as core;
use lp_bellman::{boundary, envelope, foliation, modulus, oracle};
use lp_bellman::{BoundaryParam, ConePoint, Exponent, SectionPoint};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn exponent(p: f64) -> PyResult<Exponent> {
    Exponent::new(p).map_err(err)
}

fn param(arc: u8, s: f64) -> PyResult<BoundaryParam> {
    BoundaryParam::new(arc, s).map_err(err)
}

#[pyclass(frozen, get_all, skip_from_py_object, name = "BellmanValue")]
#[derive(Clone)]
struct PyBellmanValue {
    value: f64,
    mode: String,
}

#[pymethods]
impl PyBellmanValue {
    fn __repr__(&self) -> String {
        format!("BellmanValue(value={}, mode='{}')", self.value, self.mode)
    }
}

impl From<core::BellmanValue> for PyBellmanValue {
    fn from(v: core::BellmanValue) -> Self {
        Self {
            value: v.value,
            mode: v.mode.to_string(),
        }
    }
}

/// B(y1, y2) on the section.
#[pyfunction]
fn eval_b(y1: f64, y2: f64, p: f64) -> PyResult<PyBellmanValue> {
    let e = exponent(p)?;
    Ok(core::eval_b(&SectionPoint::new(y1, y2), &e)
        .map_err(err)?
        .into())
}

/// B3(x1, x2, x3) on the cone.
#[pyfunction]
fn eval_b3(x1: f64, x2: f64, x3: f64, p: f64) -> PyResult<PyBellmanValue> {
    let e = exponent(p)?;
    Ok(core::eval_b3(&ConePoint::new(x1, x2, x3), &e)
        .map_err(err)?
        .into())
}

/// B3(1, 1, t).
#[pyfunction]
fn b3_unit(t: f64, p: f64) -> PyResult<f64> {
    core::b3_unit(t, &exponent(p)?).map_err(err)
}

#[pyfunction]
fn b_on_axis(t: f64, p: f64) -> PyResult<f64> {
    foliation::b_on_axis(t, &exponent(p)?).map_err(err)
}

#[pyfunction]
fn in_cone(x1: f64, x2: f64, x3: f64, p: f64) -> PyResult<bool> {
    Ok(core::lp_domain::in_cone(
        &ConePoint::new(x1, x2, x3),
        &exponent(p)?,
    ))
}

/// The boundary point gamma^[arc](s) as (y1, y2).
#[pyfunction]
fn boundary_point(arc: u8, s: f64, p: f64) -> PyResult<(f64, f64)> {
    let y = boundary::gamma(&param(arc, s)?, &exponent(p)?).map_err(err)?;
    Ok((y.y1, y.y2))
}

#[pyfunction]
fn boundary_value(arc: u8, s: f64, p: f64) -> PyResult<f64> {
    boundary::boundary_value(&param(arc, s)?, &exponent(p)?).map_err(err)
}

#[pyfunction]
fn torsion_closed(arc: u8, s: f64, p: f64) -> PyResult<f64> {
    Ok(boundary::torsion_closed(&param(arc, s)?, &exponent(p)?)
        .map_err(err)?
        .value())
}

#[pyfunction]
#[pyo3(signature = (arc, s, p, h=boundary::TORSION_STEP))]
fn torsion_numeric(arc: u8, s: f64, p: f64, h: f64) -> PyResult<f64> {
    Ok(boundary::torsion_numeric(&param(arc, s)?, &exponent(p)?, h)
        .map_err(err)?
        .value())
}

/// The foliation chord through (y1, y2): ((arc, s), (arc, s), axis_t, value).
#[pyfunction]
fn chord_through(y1: f64, y2: f64, p: f64) -> PyResult<((u8, f64), (u8, f64), f64, f64)> {
    let c = foliation::chord_through(&SectionPoint::new(y1, y2), &exponent(p)?).map_err(err)?;
    let [a, b] = c.endpoints;
    Ok((
        (a.arc.id(), a.s),
        (b.arc.id(), b.s),
        c.axis_t,
        c.value_at_axis,
    ))
}

#[pyfunction]
fn delta_closed(eps: f64, p: f64) -> PyResult<f64> {
    Ok(modulus::delta_closed(eps, &exponent(p)?)
        .map_err(err)?
        .delta)
}

#[pyfunction]
fn delta_bellman(eps: f64, p: f64) -> PyResult<f64> {
    Ok(modulus::delta_bellman(eps, &exponent(p)?)
        .map_err(err)?
        .delta)
}

/// Rows (eps, delta_closed, delta_bellman, discrepancy) on eps_k = 2k/grid.
#[pyfunction]
fn modulus_curve(p: f64, grid: usize) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let c = modulus::modulus_curve(&exponent(p)?, &modulus::eps_grid(grid)).map_err(err)?;
    Ok(c.rows
        .iter()
        .map(|r| (r.eps, r.delta_closed, r.delta_bellman, r.discrepancy))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (x1, x2, x3, p, budget=100_000, seed=0))]
fn lower_bound_b3(x1: f64, x2: f64, x3: f64, p: f64, budget: u64, seed: u64) -> PyResult<f64> {
    oracle::lower_bound_b3(&ConePoint::new(x1, x2, x3), &exponent(p)?, budget, seed).map_err(err)
}

fn pair(weights: Vec<f64>, phi: Vec<f64>, psi: Vec<f64>) -> PyResult<oracle::FunctionPair> {
    oracle::FunctionPair::new(weights, phi, psi).map_err(err)
}

/// Hanner slack (value, scale) for a step-function pair.
#[pyfunction]
fn verify_hanner(weights: Vec<f64>, phi: Vec<f64>, psi: Vec<f64>, p: f64) -> PyResult<(f64, f64)> {
    let s = oracle::verify_hanner(&pair(weights, phi, psi)?, &exponent(p)?);
    Ok((s.value, s.scale))
}

/// Clarkson slack (value, scale) for a step-function pair.
#[pyfunction]
fn verify_clarkson(
    weights: Vec<f64>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    p: f64,
) -> PyResult<(f64, f64)> {
    let s = oracle::verify_clarkson(&pair(weights, phi, psi)?, &exponent(p)?).map_err(err)?;
    Ok((s.value, s.scale))
}

/// Upper hull of the sampled boundary data.
#[pyclass(frozen, name = "HullSurface")]
struct PyHullSurface {
    inner: core::HullSurface,
}

#[pymethods]
impl PyHullSurface {
    #[new]
    #[pyo3(signature = (p, n=256))]
    fn new(p: f64, n: usize) -> PyResult<Self> {
        let e = exponent(p)?;
        let samples = envelope::sample_boundary(&e, n).map_err(err)?;
        Ok(Self {
            inner: envelope::build_envelope(&samples).map_err(err)?,
        })
    }

    fn eval(&self, y1: f64, y2: f64) -> PyResult<f64> {
        self.inner.eval(&SectionPoint::new(y1, y2)).map_err(err)
    }

    fn eval_clamped(&self, y1: f64, y2: f64) -> f64 {
        self.inner.eval_clamped(&SectionPoint::new(y1, y2))
    }

    #[getter]
    fn facet_count(&self) -> usize {
        self.inner.facets().len()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

#[pymodule(name = "lp_bellman")]
fn lp_bellman_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBellmanValue>()?;
    m.add_class::<PyHullSurface>()?;
    m.add_function(wrap_pyfunction!(eval_b, m)?)?;
    m.add_function(wrap_pyfunction!(eval_b3, m)?)?;
    m.add_function(wrap_pyfunction!(b3_unit, m)?)?;
    m.add_function(wrap_pyfunction!(b_on_axis, m)?)?;
    m.add_function(wrap_pyfunction!(in_cone, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_point, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_value, m)?)?;
    m.add_function(wrap_pyfunction!(torsion_closed, m)?)?;
    m.add_function(wrap_pyfunction!(torsion_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(chord_through, m)?)?;
    m.add_function(wrap_pyfunction!(delta_closed, m)?)?;
    m.add_function(wrap_pyfunction!(delta_bellman, m)?)?;
    m.add_function(wrap_pyfunction!(modulus_curve, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_b3, m)?)?;
    m.add_function(wrap_pyfunction!(verify_hanner, m)?)?;
    m.add_function(wrap_pyfunction!(verify_clarkson, m)?)?;
    Ok(())
}

//! Python bindings for the nullframe engine. Complex results (reports,
//! configs) cross the boundary as JSON strings; pointwise geometry comes
//! back as plain lists and dicts.

use nullframe::catalog;
use nullframe::driver::{self, RunConfig};
use nullframe::expr::ExpressionField;
use nullframe::frame::FrameField;
use nullframe::immersion::NullImmersion;
use nullframe::shape::ShapeEngine;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A scalar expression over named variables, with exact first and second
/// derivatives.
#[pyclass]
struct Expression {
    inner: ExpressionField,
}

#[pymethods]
impl Expression {
    #[new]
    fn new(source: &str, variables: Vec<String>) -> PyResult<Self> {
        let refs: Vec<&str> = variables.iter().map(|s| s.as_str()).collect();
        Ok(Expression {
            inner: ExpressionField::parse(source, &refs).map_err(value_err)?,
        })
    }

    fn eval(&self, point: Vec<f64>) -> PyResult<f64> {
        if point.len() != self.inner.arity() {
            return Err(value_err(format!(
                "expected {} coordinates, got {}",
                self.inner.arity(),
                point.len()
            )));
        }
        Ok(self.inner.eval(&point))
    }

    fn gradient(&self, point: Vec<f64>) -> PyResult<Vec<f64>> {
        if point.len() != self.inner.arity() {
            return Err(value_err("wrong number of coordinates"));
        }
        Ok(self.inner.gradient(&point))
    }

    #[getter]
    fn source(&self) -> &str {
        self.inner.source()
    }
}

/// A null hypersurface with its frame recipe, backed by a run configuration.
#[pyclass]
struct Surface {
    cfg: RunConfig,
}

impl Surface {
    fn immersion(&self) -> PyResult<NullImmersion> {
        driver::build_immersion(&self.cfg).map_err(runtime_err)
    }

    fn with_frame<T>(
        &self,
        f: impl FnOnce(&NullImmersion, &FrameField) -> PyResult<T>,
    ) -> PyResult<T> {
        let imm = self.immersion()?;
        let recipe = driver::build_recipe(&imm, &self.cfg, &self.cfg.screen).map_err(runtime_err)?;
        let frame = FrameField::new(&imm, recipe);
        f(&imm, &frame)
    }
}

#[pymethods]
impl Surface {
    /// Load a catalog entry; `screen` is "canonical" or a variant name.
    #[staticmethod]
    #[pyo3(signature = (name, screen = "canonical"))]
    fn from_catalog(name: &str, screen: &str) -> PyResult<Self> {
        let entry = catalog::entry(name).map_err(value_err)?;
        let cfg = entry
            .config_for(screen)
            .ok_or_else(|| value_err(format!("no screen {screen:?} on {name}")))?;
        Ok(Surface { cfg })
    }

    /// Load from a JSON run configuration (same schema as the CLI).
    #[staticmethod]
    fn from_config(json: &str) -> PyResult<Self> {
        Ok(Surface {
            cfg: driver::parse_config(json, true).map_err(value_err)?,
        })
    }

    fn config_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.cfg).map_err(runtime_err)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.cfg.name
    }

    fn grid(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.immersion()?.grid_points())
    }

    fn ambient_point(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.immersion()?.ambient_point(&u))
    }

    /// Frame data at a parameter point: position, radical field, transversal,
    /// screen basis, and the worst frame-condition residual.
    fn frame<'py>(&self, py: Python<'py>, u: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        self.with_frame(|_, frame| {
            let s = frame.sample(&u).map_err(runtime_err)?;
            let residual = frame.validate(&u).map_err(runtime_err)?.max();
            let d = PyDict::new_bound(py);
            d.set_item("x", s.x.clone())?;
            d.set_item("xi", s.xi.iter().cloned().collect::<Vec<f64>>())?;
            d.set_item(
                "transversal",
                s.transversal.iter().cloned().collect::<Vec<f64>>(),
            )?;
            d.set_item(
                "screen",
                s.screen
                    .iter()
                    .map(|e| e.iter().cloned().collect::<Vec<f64>>())
                    .collect::<Vec<Vec<f64>>>(),
            )?;
            d.set_item("residual", residual)?;
            Ok(d)
        })
    }

    /// Shape data at a parameter point: both scalar fundamental forms, the
    /// transversal one-form, both shape operators, and the null mean
    /// curvature.
    fn shape<'py>(&self, py: Python<'py>, u: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        self.with_frame(|_, frame| {
            let eng = ShapeEngine::new(frame);
            let s = eng.shape_operators(&u).map_err(runtime_err)?;
            let mat = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                    .collect()
            };
            let d = PyDict::new_bound(py);
            d.set_item("b", mat(&s.b))?;
            d.set_item("c", mat(&s.c))?;
            d.set_item("a_n", mat(&s.a_n))?;
            d.set_item("a_star", mat(&s.a_star))?;
            d.set_item("tau", s.tau_screen.iter().cloned().collect::<Vec<f64>>())?;
            d.set_item("tau_xi", s.tau_xi)?;
            d.set_item("h", s.h)?;
            Ok(d)
        })
    }

    /// Run checks (all configured checks when the list is empty) and return
    /// the report as a JSON string.
    #[pyo3(signature = (checks = vec![]))]
    fn run(&self, checks: Vec<String>) -> PyResult<String> {
        let report = driver::run(&self.cfg, &checks).map_err(runtime_err)?;
        Ok(report.to_json())
    }

    /// Export per-point frame data and residuals as CSV plus a schema
    /// sidecar.
    #[pyo3(signature = (path, checks = vec![]))]
    fn export_csv(&self, path: &str, checks: Vec<String>) -> PyResult<()> {
        let report = driver::run(&self.cfg, &checks).map_err(runtime_err)?;
        driver::export_plotdata(&self.cfg, &report, std::path::Path::new(path))
            .map_err(runtime_err)
    }
}

/// Names of the built-in catalog entries.
#[pyfunction]
fn catalog_names() -> Vec<String> {
    catalog::names().iter().map(|s| s.to_string()).collect()
}

/// The run configuration of a catalog entry as a JSON string.
#[pyfunction]
#[pyo3(signature = (name, screen = "canonical"))]
fn catalog_dump(name: &str, screen: &str) -> PyResult<String> {
    let entry = catalog::entry(name).map_err(value_err)?;
    let cfg = entry
        .config_for(screen)
        .ok_or_else(|| value_err(format!("no screen {screen:?} on {name}")))?;
    serde_json::to_string_pretty(&cfg).map_err(runtime_err)
}

#[pymodule]
fn nullframe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Expression>()?;
    m.add_class::<Surface>()?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_dump, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

//! Python bindings: workbooks, sessions, task replay and trend fitting.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gridlayers::chart::{linear_trend, poly_trend};
use gridlayers::formula::{parse, print, print_ref, RefSpec};
use gridlayers::scene::ArcToggles;
use gridlayers::session::{load_document, parse_ref, Document, Session as CoreSession};
use gridlayers::tasks::TaskScript;
use gridlayers::{CellAddress, Value};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Cell value as a Python object: `float`, `str`, `None` for empty cells,
/// or the error code string such as `#DIV/0!`.
fn to_py(py: Python<'_>, v: Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Empty => py.None(),
        Value::Num(n) => n.into_pyobject(py)?.into_any().unbind(),
        Value::Str(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Err(e) => e.code().into_pyobject(py)?.into_any().unbind(),
    })
}

#[pyclass(name = "Workbook")]
struct PyWorkbook {
    wb: gridlayers::Workbook,
    toggles: ArcToggles,
}

impl PyWorkbook {
    fn addr(&self, cell: &str) -> PyResult<CellAddress> {
        match parse_ref(cell, &self.wb.context(0)).map_err(value_error)? {
            RefSpec::Cell(a) if a.sheet < self.wb.sheet_count() => Ok(a),
            _ => Err(PyValueError::new_err(format!("`{cell}` is not a cell of this workbook"))),
        }
    }

    fn name(&self, a: CellAddress, home: usize) -> String {
        print_ref(&RefSpec::Cell(a), &self.wb.context(home))
    }
}

#[pymethods]
impl PyWorkbook {
    #[new]
    #[pyo3(signature = (sheets=None))]
    fn new(sheets: Option<Vec<String>>) -> PyResult<Self> {
        let wb = match sheets {
            Some(names) => gridlayers::Workbook::with_sheets(names).map_err(value_error)?,
            None => gridlayers::Workbook::new(),
        };
        Ok(PyWorkbook { wb, toggles: ArcToggles::default() })
    }

    /// Opens a `.glw` file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let doc = load_document(&path).map_err(|(_, d)| PyIOError::new_err(d))?;
        let wb = doc.to_workbook().map_err(value_error)?;
        Ok(PyWorkbook { wb, toggles: doc.toggles })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc = Document::from_json(text).map_err(value_error)?;
        let wb = doc.to_workbook().map_err(value_error)?;
        Ok(PyWorkbook { wb, toggles: doc.toggles })
    }

    fn to_json(&self) -> String {
        Document::from_workbook(&self.wb, self.toggles).to_json()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        std::fs::write(&path, self.to_json()).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// Sets a cell from typed input: `=` starts a formula.
    fn set(&mut self, cell: &str, text: &str) -> PyResult<()> {
        let a = self.addr(cell)?;
        self.wb.set_input(a, text).map_err(value_error)?;
        Ok(())
    }

    fn get(&self, py: Python<'_>, cell: &str) -> PyResult<Py<PyAny>> {
        to_py(py, self.wb.get_value(self.addr(cell)?))
    }

    /// Display text of the value, as the grid shows it.
    fn display(&self, cell: &str) -> PyResult<String> {
        Ok(self.wb.get_value(self.addr(cell)?).to_string())
    }

    fn formula(&self, cell: &str) -> PyResult<Option<String>> {
        Ok(self.wb.formula_text(self.addr(cell)?))
    }

    /// Precedent edges per level, as `(from, to)` address pairs.
    #[pyo3(signature = (cell, depth=2))]
    fn deps(&self, cell: &str, depth: usize) -> PyResult<Vec<Vec<(String, String)>>> {
        if depth == 0 {
            return Err(PyValueError::new_err("depth must be at least 1"));
        }
        let a = self.addr(cell)?;
        Ok(self
            .wb
            .precedents_closure(a, depth)
            .iter()
            .map(|level| level.iter().map(|(f, t)| (self.name(*f, a.sheet), self.name(*t, a.sheet))).collect())
            .collect())
    }

    fn define_cluster(&mut self, label: &str, anchor: &str, level: u32, members: Vec<String>) -> PyResult<()> {
        let anchor = self.addr(anchor)?;
        let ctx = self.wb.context(anchor.sheet);
        let refs = members
            .iter()
            .map(|m| parse_ref(m, &ctx).map_err(value_error))
            .collect::<PyResult<Vec<_>>>()?;
        self.wb.define_cluster(label, anchor, level, refs).map_err(value_error)?;
        Ok(())
    }

    fn remove_source(&mut self, cell: &str, victim: &str) -> PyResult<()> {
        let (cell, victim) = (self.addr(cell)?, self.addr(victim)?);
        self.wb.remove_source(cell, victim).map_err(value_error)?;
        Ok(())
    }

    fn sheet_names(&self) -> Vec<String> {
        self.wb.sheet_names().to_vec()
    }
}

/// A protocol session fed with NDJSON lines.
#[pyclass(name = "Session")]
struct PySession {
    inner: CoreSession,
}

#[pymethods]
impl PySession {
    #[new]
    #[pyo3(signature = (workbook=None))]
    fn new(workbook: Option<PyRef<'_, PyWorkbook>>) -> Self {
        let inner = match workbook {
            Some(w) => CoreSession::new(w.wb.clone(), w.toggles),
            None => CoreSession::new(gridlayers::Workbook::new(), ArcToggles::default()),
        };
        PySession { inner }
    }

    /// Handles one inbound line at time `now_ms`; returns outbound lines.
    fn handle_line(&mut self, line: &str, now_ms: f64) -> Vec<String> {
        encode(self.inner.handle_line(line, now_ms))
    }

    /// The full frame, as a JSON line.
    fn full_frame(&mut self, now_ms: f64) -> String {
        encode(vec![self.inner.full_frame(now_ms)]).remove(0)
    }

    fn flush(&mut self, now_ms: f64) -> Vec<String> {
        encode(self.inner.flush(now_ms).into_iter().collect())
    }

    fn revision(&self) -> u64 {
        self.inner.revision()
    }

    fn to_json(&self) -> String {
        self.inner.document().to_json()
    }
}

fn encode(out: Vec<gridlayers::session::Outbound>) -> Vec<String> {
    out.iter().map(|o| serde_json::to_string(o).expect("outbound messages serialize")).collect()
}

/// Canonical print form of a formula.
#[pyfunction]
fn canonical(formula: &str) -> PyResult<String> {
    parse(formula).map(|e| print(&e)).map_err(value_error)
}

/// Replays a task script; returns a dict report.
#[pyfunction]
fn replay_task<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let script = TaskScript::load(&path).map_err(value_error)?;
    let report = script.replay().map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("name", report.name)?;
    d.set_item("variant", report.variant)?;
    d.set_item("passed", report.passed)?;
    d.set_item("events", report.events)?;
    d.set_item("mutations", report.mutations)?;
    d.set_item("diffs", report.diffs)?;
    Ok(d)
}

/// Least-squares line: `(slope, intercept)`.
#[pyfunction(name = "linear_trend")]
fn py_linear_trend(points: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    linear_trend(&points).map_err(value_error)
}

/// Least-squares quadratic: `(a2, a1, a0)`.
#[pyfunction(name = "poly_trend")]
fn py_poly_trend(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    poly_trend(&points, 2).map(|[a, b, c]| (a, b, c)).map_err(value_error)
}

#[pymodule]
fn gridlayers_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWorkbook>()?;
    m.add_class::<PySession>()?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(replay_task, m)?)?;
    m.add_function(wrap_pyfunction!(py_linear_trend, m)?)?;
    m.add_function(wrap_pyfunction!(py_poly_trend, m)?)?;
    Ok(())
}

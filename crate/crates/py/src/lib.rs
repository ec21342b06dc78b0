//! Python bindings: grids, signal and symbol expressions, the STFT, wave front
//! estimates, operators, Q^s norms and the numerical checks.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use gmla_core::checks::{run_check, CheckKind, CheckOptions, CheckReport};
use gmla_core::operators::{anti_wick_apply, q_norm, weyl_operator, QMethod, Quantization};
use gmla_core::stft::{make_window, moyal_residual, stft};
use gmla_core::symbols::charset::{estimate_char_set, uniform_directions, RayOptions, Thresholds};
use gmla_core::wavefront::{gabor_wf, WfOptions, DEFAULT_TOL};
use gmla_core::{Error, PhaseField, PhaseGrid, SampledSignal, ShubinSymbol, SignalExpr, WavefrontEstimate, WindowKind};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Syntax { .. } | Error::UnknownPrimitive { .. } | Error::Arity { .. } | Error::Grid(_) | Error::Cone(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn ser(v: &CheckReport) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn window_kind(text: &str) -> PyResult<WindowKind> {
    WindowKind::parse(text).map_err(py_err)
}

fn quant(text: &str) -> PyResult<Quantization> {
    match text {
        "weyl" => Ok(Quantization::Weyl),
        "antiwick" => Ok(Quantization::AntiWick),
        other => Err(PyValueError::new_err(format!("quantization must be weyl or antiwick, got `{other}`"))),
    }
}

/// Uniform phase-space grid.
#[pyclass(name = "Grid", module = "gmla", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(PhaseGrid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (n = 256, half_width = 16.0, oversample = 1))]
    fn new(n: usize, half_width: f64, oversample: usize) -> PyResult<Self> {
        PhaseGrid::new(1, half_width, n, oversample).map(PyGrid).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn half_width(&self) -> f64 {
        self.0.half_width
    }

    #[getter]
    fn hx(&self) -> f64 {
        self.0.hx()
    }

    fn xs(&self) -> Vec<f64> {
        self.0.xs()
    }

    fn xis(&self) -> Vec<f64> {
        self.0.xis()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, half_width={}, oversample={})", self.0.n, self.0.half_width, self.0.oversample)
    }
}

/// Parsed signal expression.
#[pyclass(name = "Signal", module = "gmla", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySignal(SignalExpr);

#[pymethods]
impl PySignal {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        SignalExpr::parse(text).map(PySignal).map_err(py_err)
    }

    fn __call__(&self, y: f64) -> PyResult<Complex64> {
        self.0.eval(y).map_err(py_err)
    }

    /// Samples on `grid`.
    fn sample(&self, grid: &PyGrid) -> PyResult<Vec<Complex64>> {
        Ok(SampledSignal::sample(&self.0, &grid.0).map_err(py_err)?.data)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Signal({:?})", self.0.to_string())
    }
}

/// Parsed symbol with its order.
#[pyclass(name = "Symbol", module = "gmla", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySymbol(ShubinSymbol);

#[pymethods]
impl PySymbol {
    #[new]
    #[pyo3(signature = (text, order = None))]
    fn new(text: &str, order: Option<f64>) -> PyResult<Self> {
        ShubinSymbol::parse(text, order).map(PySymbol).map_err(py_err)
    }

    #[getter]
    fn order(&self) -> f64 {
        self.0.order
    }

    fn __call__(&self, x: f64, xi: f64) -> Complex64 {
        self.0.expr.eval(x, xi)
    }

    /// Characteristic directions (radians) at order `m_prime`.
    #[pyo3(signature = (m_prime = None, directions = 360, grid = None))]
    fn char_set(&self, m_prime: Option<f64>, directions: usize, grid: Option<&PyGrid>) -> PyResult<Vec<f64>> {
        let g = match grid {
            Some(g) => g.0.clone(),
            None => PhaseGrid::new(1, 16.0, 256, 1).map_err(py_err)?,
        };
        let est = estimate_char_set(
            &self.0.expr,
            m_prime.unwrap_or(self.0.order),
            &uniform_directions(directions),
            RayOptions::for_grid(&g),
            Thresholds::default(),
        );
        Ok(est.char_directions())
    }

    fn __str__(&self) -> String {
        self.0.expr.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Symbol({:?}, order={})", self.0.expr.to_string(), self.0.order)
    }
}

/// Sampled STFT.
#[pyclass(name = "PhaseField", module = "gmla", frozen)]
struct PyField(PhaseField);

#[pymethods]
impl PyField {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.grid.n, self.0.cols())
    }

    fn get(&self, j: usize, k: usize) -> PyResult<Complex64> {
        if j >= self.0.grid.n || k >= self.0.cols() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.0.get(j, k))
    }

    fn row(&self, j: usize) -> PyResult<Vec<Complex64>> {
        if j >= self.0.grid.n {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.0.row(j).to_vec())
    }

    /// Bilinear |V| at a phase-space point, None outside the grid.
    fn abs_at(&self, x: f64, xi: f64) -> Option<f64> {
        self.0.abs_at(x, xi)
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }
}

/// Wave front estimate over a uniform set of directions.
#[pyclass(name = "Wavefront", module = "gmla", frozen)]
struct PyWavefront(WavefrontEstimate);

#[pymethods]
impl PyWavefront {
    #[getter]
    fn directions(&self) -> usize {
        self.0.directions
    }

    fn gabor_set(&self) -> Vec<usize> {
        self.0.gabor_set()
    }

    fn gabor_upper(&self) -> Vec<usize> {
        self.0.gabor_upper()
    }

    fn inconclusive(&self) -> Vec<usize> {
        self.0.inconclusive()
    }

    fn sobolev_set(&self, s: f64) -> Vec<usize> {
        self.0.sobolev_set(s)
    }

    fn sobolev_union(&self) -> Vec<usize> {
        self.0.sobolev_union()
    }

    #[pyo3(signature = (tol = 1))]
    fn union_consistent(&self, tol: usize) -> bool {
        self.0.union_consistent(tol)
    }

    /// Angle in degrees of direction index `j`.
    fn degrees(&self, j: usize) -> f64 {
        360.0 * j as f64 / self.0.directions as f64
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        json_to_py(py, &self.0.to_json().map_err(py_err)?)
    }

    fn polar_csv(&self) -> String {
        self.0.polar_csv()
    }
}

fn default_grid(grid: Option<&PyGrid>) -> PyResult<PhaseGrid> {
    match grid {
        Some(g) => Ok(g.0.clone()),
        None => PhaseGrid::new(1, 16.0, 256, 1).map_err(py_err),
    }
}

#[pyfunction(name = "stft")]
#[pyo3(signature = (signal, grid = None, window = "gaussian"))]
fn py_stft(py: Python<'_>, signal: &PySignal, grid: Option<&PyGrid>, window: &str) -> PyResult<PyField> {
    let g = default_grid(grid)?;
    let w = window_kind(window)?;
    let u = signal.0.clone();
    py.detach(move || {
        let s = SampledSignal::sample(&u, &g)?;
        stft(&s, &make_window(w, &g)?)
    })
    .map(PyField)
    .map_err(py_err)
}

/// Relative inversion and energy residuals of the discrete Moyal identity.
#[pyfunction]
#[pyo3(signature = (signal, grid = None, window = "gaussian"))]
fn moyal(signal: &PySignal, grid: Option<&PyGrid>, window: &str) -> PyResult<(f64, f64)> {
    let g = default_grid(grid)?;
    let s = SampledSignal::sample(&signal.0, &g).map_err(py_err)?;
    let r = moyal_residual(&s, &make_window(window_kind(window)?, &g).map_err(py_err)?).map_err(py_err)?;
    Ok((r.inversion, r.energy))
}

#[pyfunction]
#[pyo3(signature = (signal, grid = None, window = "gaussian", directions = 360, cone_half_width = 3, fit_window = None))]
fn wavefront(
    py: Python<'_>,
    signal: &PySignal,
    grid: Option<&PyGrid>,
    window: &str,
    directions: usize,
    cone_half_width: usize,
    fit_window: Option<(f64, f64)>,
) -> PyResult<PyWavefront> {
    let g = default_grid(grid)?;
    let w = window_kind(window)?;
    let opts = WfOptions {
        directions,
        half_width_steps: cone_half_width,
        fit_window,
        ..WfOptions::default()
    };
    let u = signal.0.clone();
    py.detach(move || gabor_wf(&u, w, &g, &opts)).map(PyWavefront).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (signal, s, method = "stft-weighted", grid = None, window = "gaussian"))]
fn qnorm(signal: &PySignal, s: f64, method: &str, grid: Option<&PyGrid>, window: &str) -> PyResult<f64> {
    let g = default_grid(grid)?;
    let m = QMethod::parse(method).map_err(py_err)?;
    let u = SampledSignal::sample(&signal.0, &g).map_err(py_err)?;
    let psi = make_window(window_kind(window)?, &g).map_err(py_err)?;
    Ok(q_norm(&u, s, m, &psi).map_err(py_err)?.value)
}

/// Applies the quantized symbol to the sampled signal.
#[pyfunction]
#[pyo3(signature = (symbol, signal, quantization = "weyl", grid = None))]
fn apply(symbol: &PySymbol, signal: &PySignal, quantization: &str, grid: Option<&PyGrid>) -> PyResult<Vec<Complex64>> {
    let g = default_grid(grid)?;
    let u = SampledSignal::sample(&signal.0, &g).map_err(py_err)?;
    let out = match quant(quantization)? {
        Quantization::Weyl => weyl_operator(&symbol.0, &g).apply(&u),
        Quantization::AntiWick => {
            let psi0 = make_window(WindowKind::Gaussian, &g).map_err(py_err)?;
            anti_wick_apply(&symbol.0.expr, &u, &psi0)
        }
    };
    Ok(out.map_err(py_err)?.data)
}

/// Weyl matrix as a list of rows.
#[pyfunction]
#[pyo3(signature = (symbol, grid = None))]
fn weyl_matrix(symbol: &PySymbol, grid: Option<&PyGrid>) -> PyResult<Vec<Vec<Complex64>>> {
    let g = default_grid(grid)?;
    let m = weyl_operator(&symbol.0, &g).matrix;
    Ok((0..m.nrows()).map(|j| m.row(j).iter().copied().collect()).collect())
}

/// Runs a named check and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (kind, signal, symbol = None, quantization = "weyl", grid = None, window = "gaussian", tol = DEFAULT_TOL))]
#[allow(clippy::too_many_arguments)]
fn check(
    py: Python<'_>,
    kind: &str,
    signal: &PySignal,
    symbol: Option<&PySymbol>,
    quantization: &str,
    grid: Option<&PyGrid>,
    window: &str,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let k = CheckKind::parse(kind).map_err(py_err)?;
    let opts = CheckOptions {
        grid: default_grid(grid)?,
        window: window_kind(window)?,
        wf: WfOptions::default(),
        tol,
        quantization: quant(quantization)?,
        resolution_steps: 1,
    };
    let u = signal.0.clone();
    let a = symbol.map(|s| s.0.clone());
    let report = py.detach(move || run_check(k, &u, a.as_ref(), &opts)).map_err(py_err)?;
    json_to_py(py, &ser(&report)?)
}

#[pymodule]
pub fn gmla(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PySignal>()?;
    m.add_class::<PySymbol>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyWavefront>()?;
    m.add_function(wrap_pyfunction!(py_stft, m)?)?;
    m.add_function(wrap_pyfunction!(moyal, m)?)?;
    m.add_function(wrap_pyfunction!(wavefront, m)?)?;
    m.add_function(wrap_pyfunction!(qnorm, m)?)?;
    m.add_function(wrap_pyfunction!(apply, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}

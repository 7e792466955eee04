//! Python module `zigzag_ising`.

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use zigzag_ising::spectral::AngleSequence;
use zigzag_ising::{critical, exact, homogeneous, layered, oracle, sembedding, wetting, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Eigensolver { .. } | Error::Numeric(_) | Error::Convergence { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        Error::Consistency(_) | Error::Invariant(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn wrap<T>(r: zigzag_ising::Result<T>) -> PyResult<T> {
    r.map_err(py_err)
}

/// Angle sequence theta_1, theta_2, ... between adjacent columns.
#[pyclass(name = "Angles", frozen)]
struct PyAngles {
    inner: AngleSequence,
}

#[pymethods]
impl PyAngles {
    #[staticmethod]
    fn homogeneous(theta: f64) -> PyResult<Self> {
        Ok(Self { inner: wrap(AngleSequence::homogeneous(theta))? })
    }

    #[staticmethod]
    fn explicit(angles: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: wrap(AngleSequence::explicit(angles))? })
    }

    #[staticmethod]
    fn periodic(block: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: wrap(AngleSequence::periodic(block))? })
    }

    #[staticmethod]
    fn with_first(first: f64, theta: f64) -> PyResult<Self> {
        Ok(Self { inner: wrap(AngleSequence::with_first(first, theta))? })
    }

    #[staticmethod]
    fn prefixed(head: Vec<f64>, tail: f64) -> PyResult<Self> {
        Ok(Self { inner: wrap(AngleSequence::prefixed(head, tail))? })
    }

    /// From weights x = tan(theta / 2).
    #[staticmethod]
    fn from_x(weights: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: wrap(AngleSequence::from_x(weights))? })
    }

    fn theta(&self, k: usize) -> PyResult<f64> {
        wrap(self.inner.theta(k))
    }

    fn __repr__(&self) -> String {
        format!("Angles({:?})", self.inner.kind())
    }
}

#[pyclass(name = "MagnetizationReport", frozen, get_all)]
struct PyMagnetizationReport {
    m: usize,
    value: f64,
    method: String,
    truncation: usize,
    error_estimate: f64,
    extrapolated: bool,
}

impl From<layered::MagnetizationReport> for PyMagnetizationReport {
    fn from(r: layered::MagnetizationReport) -> Self {
        Self {
            m: r.m,
            value: r.value,
            method: r.method.name().to_string(),
            truncation: r.truncation,
            error_estimate: r.error_estimate,
            extrapolated: r.extrapolated,
        }
    }
}

#[pymethods]
impl PyMagnetizationReport {
    fn __repr__(&self) -> String {
        format!(
            "MagnetizationReport(m={}, value={}, method={:?}, truncation={})",
            self.m, self.value, self.method, self.truncation
        )
    }
}

fn options(tol: f64, truncation: Option<usize>) -> layered::MagnetizationOptions {
    layered::MagnetizationOptions {
        tol,
        truncation,
        ..Default::default()
    }
}

/// M_m by the hankel, sqrt or polar path.
#[pyfunction]
#[pyo3(signature = (angles, m, method = "sqrt", tol = 1e-8, truncation = None))]
fn magnetization(
    angles: &PyAngles,
    m: usize,
    method: &str,
    tol: f64,
    truncation: Option<usize>,
) -> PyResult<PyMagnetizationReport> {
    let method: layered::Method = wrap(method.parse())?;
    let r = wrap(layered::magnetization(&angles.inner, m, method, &options(tol, truncation)))?;
    Ok(r.into())
}

/// M_0..=M_{m_max}.
#[pyfunction]
#[pyo3(signature = (angles, m_max, method = "sqrt", tol = 1e-8, truncation = None))]
fn magnetization_profile(
    angles: &PyAngles,
    m_max: usize,
    method: &str,
    tol: f64,
    truncation: Option<usize>,
) -> PyResult<Vec<PyMagnetizationReport>> {
    let method: layered::Method = wrap(method.parse())?;
    let rs = wrap(layered::magnetization_profile(&angles.inner, m_max, method, &options(tol, truncation)))?;
    Ok(rs.into_iter().map(Into::into).collect())
}

#[pyfunction]
fn wu_diagonal(n: usize) -> f64 {
    exact::wu_diagonal(n)
}

/// Closed-form zig-zag magnetization at the homogeneous critical point.
#[pyfunction]
fn zigzag_magnetization_exact(m: usize) -> PyResult<f64> {
    Ok(wrap(exact::zigzag_magnetization_exact(m))?.direct)
}

#[pyfunction]
fn koy_magnetization(theta_h: f64, theta_v: f64) -> PyResult<f64> {
    wrap(homogeneous::koy_magnetization(theta_h, theta_v))
}

/// Telescoped subcritical products for m = 0..=m_max.
#[pyfunction]
fn subcritical_product(theta_h: f64, theta_v: f64, m_max: usize) -> PyResult<Vec<f64>> {
    Ok(wrap(homogeneous::subcritical_product(theta_h, theta_v, m_max))?.values)
}

#[pyfunction]
fn c_sigma() -> f64 {
    critical::c_sigma()
}

/// Critical row correlations D_0..=D_{n_max}.
#[pyfunction]
fn critical_correlations(theta: f64, n_max: usize) -> PyResult<Vec<f64>> {
    Ok(wrap(critical::critical_correlations(theta, n_max))?.d)
}

#[pyclass(name = "WettingReport", frozen, get_all)]
struct PyWettingReport {
    m: usize,
    value: f64,
    variant: String,
    statement: f64,
    proof_display: f64,
    reference: f64,
    deviation: f64,
}

/// Boundary-field magnetization from the Toeplitz+Hankel determinant.
#[pyfunction]
fn wetting_magnetization(q: f64, r: f64, m: usize) -> PyResult<PyWettingReport> {
    let model = wrap(wetting::WettingModel::from_qr(q, r))?;
    let w = wrap(wetting::wetting_magnetization(&model, m))?;
    Ok(PyWettingReport {
        m: w.m,
        value: w.value,
        variant: w.variant.name().to_string(),
        statement: w.statement,
        proof_display: w.proof_display,
        reference: w.reference,
        deviation: w.deviation,
    })
}

#[pyfunction]
fn cj_constant(block: Vec<f64>) -> PyResult<f64> {
    wrap(layered::cj_constant(&block))
}

/// (slope, C_J) of the empirical IDS near the bottom edge.
#[pyfunction]
#[pyo3(signature = (block, n_periods, lambda_max = 0.05, points = 4000))]
fn ids_slope(block: Vec<f64>, n_periods: usize, lambda_max: f64, points: usize) -> PyResult<(f64, f64)> {
    let fit = wrap(layered::ids_empirical(&block, n_periods, lambda_max, points))?;
    Ok((fit.slope, fit.cj))
}

#[pyfunction]
fn twisted_lowest_eigenvalue(block: Vec<f64>, t: f64) -> PyResult<f64> {
    wrap(layered::twisted_lowest_eigenvalue(&block, t))
}

#[pyclass(name = "Embedding", frozen, get_all)]
struct PyEmbedding {
    phi: Vec<f64>,
    t_bullet: Vec<f64>,
    t_circ: Vec<f64>,
    period_width: f64,
    svg: String,
}

/// Canonical s-embedding over `columns` columns.
#[pyfunction]
#[pyo3(signature = (block, columns, rows = 4))]
fn embed(block: Vec<f64>, columns: usize, rows: usize) -> PyResult<PyEmbedding> {
    let e = wrap(sembedding::embed(&block, columns))?;
    Ok(PyEmbedding {
        svg: e.to_svg(rows),
        phi: e.phi,
        t_bullet: e.t_bullet,
        t_circ: e.t_circ,
        period_width: e.period_width,
    })
}

/// (coordinate, half-sum, geometric) expressions of the period width.
#[pyfunction]
fn period_width(block: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let w = wrap(sembedding::period_width(&block))?;
    Ok((w.coordinate, w.half_sum, w.geometric))
}

#[pyclass(name = "StripSpec", frozen)]
struct PyStripSpec {
    inner: oracle::StripSpec,
}

#[pymethods]
impl PyStripSpec {
    #[new]
    #[pyo3(signature = (width, height, couplings, boundary = 1))]
    fn new(width: usize, height: usize, couplings: Vec<f64>, boundary: i8) -> PyResult<Self> {
        if boundary != 1 && boundary != -1 {
            return Err(PyValueError::new_err("boundary must be +1 or -1"));
        }
        let mut inner = wrap(oracle::StripSpec::new(width, height, couplings))?;
        inner.boundary = boundary;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_angles(angles: &PyAngles, width: usize, height: usize) -> PyResult<Self> {
        Ok(Self { inner: wrap(oracle::StripSpec::from_angles(&angles.inner, width, height))? })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height
    }

    #[getter]
    fn couplings(&self) -> Vec<f64> {
        self.inner.couplings.clone()
    }

    fn transfer_matrix_magnetization(&self, column: usize, row: usize) -> PyResult<f64> {
        wrap(oracle::transfer_matrix_magnetization(&self.inner, column, row))
    }

    fn enumerate_magnetization(&self, column: usize, row: usize) -> PyResult<f64> {
        wrap(oracle::enumerate_magnetization(&self.inner, column, row))
    }

    /// Middle spin of column 2m.
    fn magnetization(&self, m: usize) -> PyResult<f64> {
        wrap(oracle::strip_magnetization(&self.inner, m))
    }
}

#[pymodule]
#[pyo3(name = "zigzag_ising")]
fn zigzag_ising_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAngles>()?;
    m.add_class::<PyMagnetizationReport>()?;
    m.add_class::<PyWettingReport>()?;
    m.add_class::<PyEmbedding>()?;
    m.add_class::<PyStripSpec>()?;
    m.add_function(wrap_pyfunction!(magnetization, m)?)?;
    m.add_function(wrap_pyfunction!(magnetization_profile, m)?)?;
    m.add_function(wrap_pyfunction!(wu_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(zigzag_magnetization_exact, m)?)?;
    m.add_function(wrap_pyfunction!(koy_magnetization, m)?)?;
    m.add_function(wrap_pyfunction!(subcritical_product, m)?)?;
    m.add_function(wrap_pyfunction!(c_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(critical_correlations, m)?)?;
    m.add_function(wrap_pyfunction!(wetting_magnetization, m)?)?;
    m.add_function(wrap_pyfunction!(cj_constant, m)?)?;
    m.add_function(wrap_pyfunction!(ids_slope, m)?)?;
    m.add_function(wrap_pyfunction!(twisted_lowest_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(period_width, m)?)?;
    Ok(())
}

use num_complex::Complex64;
use posmap::bloch_scan::{self, ScanGrid};
use posmap::circulant::{self, Block};
use posmap::conditions::{self, ClassifyOptions};
use posmap::linalg::{herm_eigenvalues, CMatrix, HermitianMatrix};
use posmap::positivity::{self, SearchSettings};
use posmap::{lemma, map_kernel, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::NotHermitian(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Round-trips a serialisable value through `json.loads` so callers get plain dicts.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn hermitian(rows: Vec<Vec<Complex64>>) -> PyResult<HermitianMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let m = CMatrix::from_row_major(rows.into_iter().flatten().collect()).map_err(to_py_err)?;
    HermitianMatrix::new(m).map_err(to_py_err)
}

fn rows(h: &HermitianMatrix) -> Vec<Vec<Complex64>> {
    let m = h.matrix();
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m[(i, j)]).collect()).collect()
}

fn settings(restarts: usize, seed: u64) -> SearchSettings {
    SearchSettings {
        restarts,
        seed,
        ..Default::default()
    }
}

fn block(which: &str) -> PyResult<Block> {
    match which {
        "B" | "b" => Ok(Block::B),
        "C" | "c" => Ok(Block::C),
        _ => Err(PyValueError::new_err(format!("block must be 'B' or 'C', got {which:?}"))),
    }
}

/// The optimised map `tau_{n,k} - lambda (P_v o X)`.
#[pyclass(name = "MapSpec", frozen)]
struct PyMapSpec {
    inner: map_kernel::MapSpec,
}

#[pymethods]
impl PyMapSpec {
    /// `coeffs` defaults to the uniform choice for `gcd(n, k)`.
    #[new]
    #[pyo3(signature = (n, k, lam, coeffs=None))]
    fn new(n: usize, k: usize, lam: f64, coeffs: Option<Vec<Complex64>>) -> PyResult<Self> {
        let coeffs = coeffs.unwrap_or_else(|| map_kernel::default_coeffs(map_kernel::gcd(n, k)));
        let inner = map_kernel::MapSpec::new(n, k, lam, coeffs).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    #[getter]
    fn gcd(&self) -> usize {
        self.inner.gcd()
    }

    #[getter]
    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.coeffs().to_vec()
    }

    #[getter]
    fn v(&self) -> Vec<Complex64> {
        self.inner.v().to_vec()
    }

    fn with_lambda(&self, lam: f64) -> PyResult<Self> {
        let inner = self.inner.with_lambda(lam).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// Applies the map to a Hermitian matrix given as a list of rows.
    fn apply(&self, x: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
        let out = map_kernel::optimized_apply(&self.inner, &hermitian(x)?).map_err(to_py_err)?;
        Ok(rows(&out))
    }

    /// Minimum of the search objective over real unit vectors.
    #[pyo3(signature = (restarts=50, seed=0))]
    fn min_search<'py>(&self, py: Python<'py>, restarts: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let s = settings(restarts, seed);
        let r = py.detach(|| positivity::robust_min(&self.inner, &s)).map_err(to_py_err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (restarts=50, seed=0))]
    fn is_positive(&self, py: Python<'_>, restarts: usize, seed: u64) -> PyResult<bool> {
        let s = settings(restarts, seed);
        py.detach(|| positivity::is_positive(&self.inner, &s)).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MapSpec(n={}, k={}, lam={}, gcd={})",
            self.inner.n(),
            self.inner.k(),
            self.inner.lambda(),
            self.inner.gcd()
        )
    }
}

#[pyfunction]
fn tau_apply(n: usize, k: usize, x: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    let out = map_kernel::tau_apply(n, k, &hermitian(x)?).map_err(to_py_err)?;
    Ok(rows(&out))
}

#[pyfunction]
fn eigenvalues(x: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
    Ok(herm_eigenvalues(&hermitian(x)?))
}

#[pyfunction]
fn gcd(a: usize, b: usize) -> usize {
    map_kernel::gcd(a, b)
}

#[pyfunction]
fn c_spectrum(py: Python<'_>, n: usize, k: usize) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &circulant::c_spectrum(n, k).map_err(to_py_err)?)
}

#[pyfunction]
fn build_abc(py: Python<'_>, n: usize, k: usize) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &circulant::build_abc(n, k).map_err(to_py_err)?)
}

#[pyfunction]
fn mu_constant() -> f64 {
    circulant::mu_constant()
}

#[pyfunction]
fn proposition_holds(n: usize, k: usize) -> PyResult<bool> {
    conditions::proposition_holds(n, k).map_err(to_py_err)
}

#[pyfunction]
fn corollary1_holds(n: usize, k: usize) -> bool {
    conditions::corollary1_holds(n, k)
}

#[pyfunction]
fn corollary2_holds(n: usize, k: usize) -> bool {
    conditions::corollary2_holds(n, k)
}

#[pyfunction]
#[pyo3(signature = (n, k, budget=200, seed=0))]
fn theorem2_infimum(py: Python<'_>, n: usize, k: usize, budget: usize, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let r = py.detach(|| conditions::theorem2_infimum(n, k, budget, seed)).map_err(to_py_err)?;
    to_py(py, &r)
}

/// Classification records for every even pair with `n <= n_max`.
#[pyfunction]
#[pyo3(signature = (n_max, with_thm2=false, budget=200, seed=0))]
fn classify(py: Python<'_>, n_max: usize, with_thm2: bool, budget: usize, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let opts = ClassifyOptions { with_thm2, budget, seed };
    let r = py.detach(|| conditions::classify_all(n_max, &opts)).map_err(to_py_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (n, k, coeffs=None, restarts=50, seed=0))]
fn lambda_max(
    py: Python<'_>,
    n: usize,
    k: usize,
    coeffs: Option<Vec<Complex64>>,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'_, PyAny>> {
    let coeffs = coeffs.unwrap_or_else(|| map_kernel::default_coeffs(map_kernel::gcd(n, k)));
    let s = settings(restarts, seed);
    let r = py.detach(|| positivity::lambda_max(n, k, &coeffs, &s)).map_err(to_py_err)?;
    to_py(py, &r)
}

#[pyfunction]
fn bloch_coeffs(phi: f64, theta: f64) -> (Complex64, Complex64) {
    bloch_scan::bloch_coeffs(phi, theta)
}

#[pyfunction]
fn verify_rotation_identity(n: usize, alpha: Complex64, beta: Complex64) -> PyResult<f64> {
    bloch_scan::verify_rotation_identity(n, alpha, beta).map_err(to_py_err)
}

#[pyfunction]
fn conjecture_hi(n: usize, k: usize) -> f64 {
    bloch_scan::conjecture_hi(n, k)
}

/// Runs (or resumes) a Bloch-sphere scan and returns its summary report.
#[pyfunction]
#[pyo3(signature = (n, k, phi_res=24, theta_res=13, restarts=25, seed=0, checkpoint=None, tol=0.05))]
#[allow(clippy::too_many_arguments)]
fn scan(
    py: Python<'_>,
    n: usize,
    k: usize,
    phi_res: usize,
    theta_res: usize,
    restarts: usize,
    seed: u64,
    checkpoint: Option<std::path::PathBuf>,
    tol: f64,
) -> PyResult<Bound<'_, PyAny>> {
    let s = settings(restarts, seed);
    let report = py
        .detach(|| {
            let mut grid = match &checkpoint {
                Some(p) => ScanGrid::resume_or_new(p, n, k, phi_res, theta_res, s)?,
                None => ScanGrid::new(n, k, phi_res, theta_res, s)?,
            };
            bloch_scan::scan(&mut grid, checkpoint.as_deref(), None)?;
            bloch_scan::conjecture_report(&grid, tol)
        })
        .map_err(to_py_err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (n, k, which, samples=10_000, seed=0))]
fn lemma_report<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    which: &str,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let which = block(which)?;
    let r = py.detach(|| lemma::lemma_report(n, k, which, samples, seed)).map_err(to_py_err)?;
    to_py(py, &r)
}

#[pymodule]
fn posmap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMapSpec>()?;
    m.add_function(wrap_pyfunction!(tau_apply, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(gcd, m)?)?;
    m.add_function(wrap_pyfunction!(c_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(build_abc, m)?)?;
    m.add_function(wrap_pyfunction!(mu_constant, m)?)?;
    m.add_function(wrap_pyfunction!(proposition_holds, m)?)?;
    m.add_function(wrap_pyfunction!(corollary1_holds, m)?)?;
    m.add_function(wrap_pyfunction!(corollary2_holds, m)?)?;
    m.add_function(wrap_pyfunction!(theorem2_infimum, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_max, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(verify_rotation_identity, m)?)?;
    m.add_function(wrap_pyfunction!(conjecture_hi, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_report, m)?)?;
    Ok(())
}

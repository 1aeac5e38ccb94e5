//! Python bindings: exact exponent checks and config-driven runs.

use std::path::Path;

use hartree_core::admissibility::{self, AdmissiblePair};
use hartree_core::{ExtRational, Rational};
use hartree_lab::{ExperimentConfig, RunError};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn rational(s: &str) -> PyResult<Rational> {
    s.parse().map_err(|e: hartree_core::Error| PyValueError::new_err(e.to_string()))
}

fn inverse(s: &str) -> PyResult<Rational> {
    let x: ExtRational = s.parse().map_err(|e: hartree_core::Error| PyValueError::new_err(e.to_string()))?;
    match x {
        ExtRational::Infinity => Ok(Rational::zero()),
        ExtRational::Finite(v) => v.recip().map_err(|e| PyValueError::new_err(e.to_string())),
    }
}

fn py_err(e: RunError) -> PyErr {
    match e {
        RunError::Validation(m) => PyValueError::new_err(m),
        RunError::Numerical(m) => PyRuntimeError::new_err(m),
        RunError::Io(m) => PyOSError::new_err(m),
    }
}

/// `(window, p, ok)` for the critical-space theorem, with the window as `"(lo, hi)"`.
#[pyfunction]
fn gamma_window(dim: u32, s: &str, alpha: &str, b: &str) -> PyResult<(Option<String>, Option<String>, bool)> {
    let check = admissibility::gamma_window(dim, &rational(s)?, &rational(alpha)?, &rational(b)?);
    Ok((check.window.map(|w| w.to_string()), check.p.map(|p| p.to_string()), check.ok))
}

/// `(admissible, violated conditions)`; `s` defaults to the scaling value.
#[pyfunction]
#[pyo3(signature = (dim, q, r, gamma, s=None))]
fn is_admissible(dim: u32, q: &str, r: &str, gamma: &str, s: Option<&str>) -> PyResult<(bool, Vec<String>)> {
    let (inv_q, inv_r, gamma) = (inverse(q)?, inverse(r)?, rational(gamma)?);
    let pair = match s {
        Some(s) => AdmissiblePair::new(dim, inv_q, inv_r, gamma, rational(s)?),
        None => AdmissiblePair::from_scaling(dim, inv_q, inv_r, gamma),
    };
    let v = admissibility::is_admissible(&pair);
    Ok((v.admissible, v.violated.iter().map(|c| c.to_string()).collect()))
}

/// Runs a JSON config into `out_dir` and returns `results.json` as a string.
#[pyfunction]
fn run_config(py: Python<'_>, config_json: &str, out_dir: &str) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).map_err(py_err)?;
    let results = py.detach(|| hartree_lab::run(&config, Path::new(out_dir))).map_err(py_err)?;
    Ok(results.to_string())
}

/// Summary text of a finished run directory.
#[pyfunction]
fn report(dir: &str) -> PyResult<String> {
    hartree_lab::report(Path::new(dir)).map_err(py_err)
}

#[pymodule]
fn hartree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(gamma_window, m)?)?;
    m.add_function(wrap_pyfunction!(is_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}

use std::path::Path;

use noisereg::fourier::extract_modes_capped;
use noisereg::harness::{
    build_qaoa_toy, run_experiment, summarize as summarize_dir, ExperimentConfig,
};
use noisereg::optim::{
    improvement_ratio as ratio, CircuitLoss, ParametricLoss, Schedule, ScheduleKind,
};
use noisereg::paulisim::CircuitFile;
use noisereg::whrf::WishartField;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: noisereg::Error) -> PyErr {
    match e {
        noisereg::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn loss_from_json(circuit_json: &str) -> noisereg::Result<CircuitLoss> {
    let file = CircuitFile::from_json(circuit_json)?;
    CircuitLoss::new(file.circuit, file.observable)
}

fn parse_kind(kind: &str) -> noisereg::Result<ScheduleKind> {
    Ok(match kind {
        "exponential" => ScheduleKind::Exponential,
        "linear" => ScheduleKind::Linear,
        "cosine" => ScheduleKind::Cosine,
        "step" => ScheduleKind::Step,
        "constant" => ScheduleKind::Constant,
        other => {
            return Err(noisereg::Error::InvalidArgument(format!(
                "unknown schedule kind {other:?}"
            )));
        }
    })
}

/// Noisy loss `L(φ, μ)` of a circuit given in the JSON interchange format.
#[pyfunction]
fn expectation(circuit_json: &str, phi: Vec<f64>, mu: f64) -> PyResult<f64> {
    let loss = loss_from_json(circuit_json).map_err(to_py)?;
    loss.value(&phi, mu).map_err(to_py)
}

/// `(L(φ, μ), ∇_φ L)` by adjoint differentiation.
#[pyfunction]
fn value_and_grad(circuit_json: &str, phi: Vec<f64>, mu: f64) -> PyResult<(f64, Vec<f64>)> {
    let loss = loss_from_json(circuit_json).map_err(to_py)?;
    loss.value_and_gradient(&phi, mu).map_err(to_py)
}

/// Nonzero Fourier coefficients as `(omega, re, im)` with `omega` in `+0-`
/// notation, parameter 0 leftmost.
#[pyfunction]
fn fourier_modes(circuit_json: &str, cap: usize) -> PyResult<Vec<(String, f64, f64)>> {
    let file = CircuitFile::from_json(circuit_json).map_err(to_py)?;
    let table = extract_modes_capped(&file.circuit, &file.observable, cap).map_err(to_py)?;
    Ok(table
        .coeffs()
        .iter()
        .map(|(w, c)| (w.to_string(), c.re, c.im))
        .collect())
}

/// `μ(i)` for `i = 0..=i_max`.
#[pyfunction]
#[pyo3(signature = (kind, i_max, mu_max = 0.9, a = 10.0))]
fn schedule(kind: &str, i_max: usize, mu_max: f64, a: f64) -> PyResult<Vec<f64>> {
    let s = Schedule::new(parse_kind(kind).map_err(to_py)?, mu_max, a, i_max).map_err(to_py)?;
    (0..=i_max).map(|i| s.mu(i).map_err(to_py)).collect()
}

/// Regularized WHRF loss of a seeded instance at damping `λ = 1 − μ`.
#[pyfunction]
fn whrf_loss(m: usize, d: usize, seed: u64, phi: Vec<f64>, lam: f64) -> PyResult<f64> {
    let field = WishartField::sample(m, d, seed).map_err(to_py)?;
    field.loss_reg(&phi, lam).map_err(to_py)
}

#[pyfunction]
fn improvement_ratio(baseline: Vec<f64>, regularized: Vec<f64>, p: f64) -> PyResult<f64> {
    ratio(&baseline, &regularized, p).map_err(to_py)
}

/// The QAOA toy circuit and cost Hamiltonian as interchange JSON.
#[pyfunction]
fn qaoa_toy_json(n: usize, seed: u64) -> PyResult<String> {
    let (circuit, observable) = build_qaoa_toy(n, seed).map_err(to_py)?;
    Ok(CircuitFile {
        circuit,
        observable,
    }
    .to_json())
}

/// Runs a TOML experiment config into `out_dir`; returns the report text.
#[pyfunction]
fn run(py: Python<'_>, config_toml: &str, out_dir: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_toml(config_toml).map_err(to_py)?;
    let outcome = py
        .detach(|| run_experiment(&cfg, Path::new(out_dir)))
        .map_err(to_py)?;
    Ok(outcome.summary.map(|s| s.report()).unwrap_or_default())
}

/// Recomputes summary.csv and report.txt of a results directory.
#[pyfunction]
fn summarize(out_dir: &str) -> PyResult<String> {
    summarize_dir(Path::new(out_dir))
        .map(|s| s.report())
        .map_err(to_py)
}

#[pymodule]
fn pynoisereg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(expectation, m)?)?;
    m.add_function(wrap_pyfunction!(value_and_grad, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_modes, m)?)?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    m.add_function(wrap_pyfunction!(whrf_loss, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(qaoa_toy_json, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_kinds_parse() {
        for kind in ["exponential", "linear", "cosine", "step", "constant"] {
            assert_eq!(parse_kind(kind).unwrap().name(), kind);
        }
        assert!(parse_kind("quadratic").is_err());
    }

    #[test]
    fn json_loss_matches_core() {
        let (c, h) = build_qaoa_toy(3, 1).unwrap();
        let json = CircuitFile {
            circuit: c.clone(),
            observable: h.clone(),
        }
        .to_json();
        let loss = loss_from_json(&json).unwrap();
        let phi = [0.4, -1.1];
        assert_eq!(
            loss.value(&phi, 0.2).unwrap(),
            c.expectation(&h, &phi, 0.2).unwrap()
        );
        assert!(loss_from_json("{").is_err());
    }
}

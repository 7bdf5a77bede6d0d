use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qkdv::bethe::{find_q_zeros, qq_residuals, RaySpec, RootKind};
use qkdv::connection::{extract_q_with, triple_grid, ConnectionConfig, QEvaluator};
use qkdv::oper::StateSolution;
use qkdv::params::{indices_from_r, oper_to_cft, p2_count, r_from_rbar, OperParams, WeylElement};
use qkdv::trivmon::{newton_solve, residuals, SolverConfig};
use qkdv::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Parse(_) | Error::Index(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn oper(k: f64, r1bar: Complex64, r2bar: Complex64) -> PyResult<OperParams> {
    let p = OperParams::new(k, r1bar, r2bar);
    p.validate().map_err(py_err)?;
    Ok(p)
}

/// Ground state when `a` and `w` are empty, else the level-N state they define.
fn state(k: f64, r1bar: Complex64, r2bar: Complex64, a: Vec<Complex64>, w: Vec<Complex64>) -> PyResult<StateSolution> {
    let p = oper(k, r1bar, r2bar)?;
    if a.is_empty() && w.is_empty() {
        return Ok(StateSolution::ground(p));
    }
    StateSolution::new(p, a, w).map_err(py_err)
}

fn evaluator(sol: &StateSolution) -> PyResult<QEvaluator> {
    QEvaluator::new(sol, &ConnectionConfig::default()).map_err(py_err)
}

/// CFT data and local indices of the oper with parameters (k, r̄¹, r̄²).
#[pyfunction]
#[pyo3(signature = (k, r1bar, r2bar))]
fn params<'py>(py: Python<'py>, k: f64, r1bar: Complex64, r2bar: Complex64) -> PyResult<Bound<'py, PyDict>> {
    let p = oper(k, r1bar, r2bar)?;
    let cft = oper_to_cft(&p).map_err(py_err)?;
    let r = r_from_rbar(p.r1bar, p.r2bar);
    let idx = indices_from_r(&r);
    let d = PyDict::new(py);
    d.set_item("c", cft.c)?;
    d.set_item("delta2", cft.delta2)?;
    d.set_item("delta3", cft.delta3)?;
    d.set_item("r", (r.r1, r.r2))?;
    d.set_item("beta", idx.beta.to_vec())?;
    d.set_item("beta_star", idx.beta_star.to_vec())?;
    Ok(d)
}

/// Level-N solutions (a, w, residual) of the trivial-monodromy system.
#[pyfunction]
#[pyo3(signature = (n, k, r1bar, r2bar, seeds=None, rng_seed=None))]
fn solve(
    py: Python<'_>,
    n: usize,
    k: f64,
    r1bar: Complex64,
    r2bar: Complex64,
    seeds: Option<usize>,
    rng_seed: Option<u64>,
) -> PyResult<Vec<(Vec<Complex64>, Vec<Complex64>, f64)>> {
    let p = oper(k, r1bar, r2bar)?;
    let base = SolverConfig::for_params(&p);
    let cfg = SolverConfig {
        n_seeds: seeds.unwrap_or(base.n_seeds),
        rng_seed: rng_seed.unwrap_or(base.rng_seed),
        ..base
    };
    cfg.validate().map_err(py_err)?;
    let sols = py.detach(|| newton_solve(n, &p, &cfg)).map_err(py_err)?;
    sols.into_iter()
        .map(|s| {
            let res = if s.n == 0 {
                0.0
            } else {
                residuals(&s.a, &s.w, &p).map_err(py_err)?.norm_inf()
            };
            Ok((s.a, s.w, res))
        })
        .collect()
}

/// Number of level-N states, the count of bipartitions of N.
#[pyfunction]
fn expected_count(n: usize) -> u64 {
    p2_count(n)
}

/// (Q₁..₃, Q*₁..₃) at each λ.
#[pyfunction]
#[pyo3(signature = (k, r1bar, r2bar, lambdas, a=vec![], w=vec![]))]
fn q_values(
    py: Python<'_>,
    k: f64,
    r1bar: Complex64,
    r2bar: Complex64,
    lambdas: Vec<Complex64>,
    a: Vec<Complex64>,
    w: Vec<Complex64>,
) -> PyResult<Vec<(Vec<Complex64>, Vec<Complex64>)>> {
    let sol = state(k, r1bar, r2bar, a, w)?;
    let ev = evaluator(&sol)?;
    let qt = py.detach(|| extract_q_with(&ev, &lambdas)).map_err(py_err)?;
    Ok((0..qt.len())
        .map(|i| ((0..3).map(|j| qt.q[j][i]).collect(), (0..3).map(|j| qt.qstar[j][i]).collect()))
        .collect())
}

/// Largest calibrated QQ̃ residual of a sector on n_base triples of radius `radius`.
#[pyfunction]
#[pyo3(signature = (k, r1bar, r2bar, sector="id", n_base=16, radius=0.5, a=vec![], w=vec![]))]
#[allow(clippy::too_many_arguments)]
fn qq_residual(
    py: Python<'_>,
    k: f64,
    r1bar: Complex64,
    r2bar: Complex64,
    sector: &str,
    n_base: usize,
    radius: f64,
    a: Vec<Complex64>,
    w: Vec<Complex64>,
) -> PyResult<f64> {
    let sol = state(k, r1bar, r2bar, a, w)?;
    let s = WeylElement::parse(sector).map_err(py_err)?;
    if n_base == 0 || !(radius > 0.0) {
        return Err(PyValueError::new_err("need n_base > 0 and radius > 0"));
    }
    let ev = evaluator(&sol)?;
    let khat = sol.params.khat();
    let bases: Vec<Complex64> = (0..n_base)
        .map(|j| Complex64::from_polar(radius, 0.1 + std::f64::consts::TAU * j as f64 / n_base as f64))
        .collect();
    py.detach(|| {
        let qt = extract_q_with(&ev, &triple_grid(&bases, khat))?;
        qq_residuals(&qt, &ev.indices, khat, &s).map(|r| r.max_calibrated())
    })
    .map_err(py_err)
}

/// Zeros of Q_{s(1)} ("q") or Q*_{s(3)} ("qstar") on the real-E ray, as
/// (λ, Bethe residual) pairs.
#[pyfunction]
#[pyo3(signature = (k, r1bar, r2bar, e_max=50.0, samples=80, sector="id", which="q", a=vec![], w=vec![]))]
#[allow(clippy::too_many_arguments)]
fn bethe_roots(
    py: Python<'_>,
    k: f64,
    r1bar: Complex64,
    r2bar: Complex64,
    e_max: f64,
    samples: usize,
    sector: &str,
    which: &str,
    a: Vec<Complex64>,
    w: Vec<Complex64>,
) -> PyResult<Vec<(Complex64, f64)>> {
    let sol = state(k, r1bar, r2bar, a, w)?;
    let s = WeylElement::parse(sector).map_err(py_err)?;
    let kind = match which {
        "q" => RootKind::ZeroOfQ,
        "qstar" => RootKind::ZeroOfQstar,
        _ => return Err(PyValueError::new_err(format!("which must be 'q' or 'qstar', got {which:?}"))),
    };
    let ray = RaySpec::real_e(k, 0.0, e_max, samples);
    ray.validate().map_err(py_err)?;
    let ev = evaluator(&sol)?;
    let roots = py
        .detach(|| find_q_zeros(&ev, &ev.indices, sol.params.khat(), &s, kind, &ray, 1e-8))
        .map_err(py_err)?;
    Ok(roots.into_iter().map(|r| (r.lambda_root, r.ba_residual)).collect())
}

#[pymodule]
fn qkdv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(params, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(expected_count, m)?)?;
    m.add_function(wrap_pyfunction!(q_values, m)?)?;
    m.add_function(wrap_pyfunction!(qq_residual, m)?)?;
    m.add_function(wrap_pyfunction!(bethe_roots, m)?)?;
    Ok(())
}

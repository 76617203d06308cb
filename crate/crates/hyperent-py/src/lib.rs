//! Python bindings. Angles are radians here, as in the Rust API; matrices
//! travel as nested lists of complex numbers.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use hyperent::circuits::{self, PhaseConfig};
use hyperent::fidelity::{self, ChannelKind, ChannelLayout, FidelityParams};
use hyperent::hardy;
use hyperent::linalg::CMat;
use hyperent::measurement::{self, ChshSettings, Observable};
use hyperent::measures;
use hyperent::protocols::{self, Ancilla, AttackConfig, SignalingConfig};
use hyperent::trace;

fn err(e: hyperent::Error) -> PyErr {
    if e.is_numeric() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse<T: std::str::FromStr<Err = hyperent::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn to_cmat(rows: Vec<Vec<Complex64>>) -> PyResult<CMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square matrix"));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

fn from_cmat(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn phases(p: [f64; 4]) -> PyResult<PhaseConfig> {
    PhaseConfig::new(p[0], p[1], p[2], p[3]).map_err(err)
}

/// Reduced or full density operator produced by the circuit and trace rules.
#[pyclass(name = "DensityMatrix", module = "hyperent_py", skip_from_py_object)]
#[derive(Clone)]
struct PyDensity {
    inner: hyperent::DensityMatrix,
}

#[pymethods]
impl PyDensity {
    /// Two-particle circuit output, optionally projected onto one particle per party.
    #[staticmethod]
    #[pyo3(signature = (kind, phases_ldru, project=true))]
    fn circuit(kind: &str, phases_ldru: [f64; 4], project: bool) -> PyResult<Self> {
        let rho = circuits::li_circuit(parse(kind)?, &phases(phases_ldru)?).to_density().map_err(err)?;
        let inner = if project {
            trace::project_one_per_region(&rho, &[circuits::ALICE, circuits::BOB]).map_err(err)?
        } else {
            rho
        };
        Ok(PyDensity { inner })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        from_cmat(&self.inner.data)
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    /// Trace out `region` or `region:dof`.
    fn trace_out(&self, subsystem: &str) -> PyResult<Self> {
        let sub: hyperent::Subsystem = parse(subsystem)?;
        let inner = match (sub.dof_index, self.inner.kind) {
            (None, _) => trace::trace_region(&self.inner, &sub.region),
            (Some(j), hyperent::ParticleKind::Distinguishable) => {
                trace::slot_of_region(&self.inner, &sub.region).and_then(|s| trace::trace_dof_dist(&self.inner, s, j))
            }
            (Some(_), _) => trace::trace_dof_indist(&self.inner, &sub),
        }
        .map_err(err)?;
        Ok(PyDensity { inner })
    }

    /// Operator on the kept `(region, dof)` qubits, in order.
    fn reduce_to_qubits(&self, keep: Vec<(String, usize)>) -> PyResult<Vec<Vec<Complex64>>> {
        trace::reduce_to_qubits(&self.inner, &keep).map(|m| from_cmat(&m)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(kind={}, dim={})", self.inner.kind, self.inner.dim())
    }
}

/// Coincidence tables as `(obs_a, obs_b, rows, cols, probs)` tuples.
#[pyfunction]
fn coincidence_tables(kind: &str, phases_ldru: [f64; 4]) -> PyResult<Vec<(String, String, [String; 2], [String; 2], [[f64; 2]; 2])>> {
    let s = circuits::li_circuit(parse(kind)?, &phases(phases_ldru)?);
    let tables = measurement::all_tables(&s).map_err(err)?;
    let name = |o: Observable| format!("{o:?}").to_lowercase();
    Ok(tables.into_iter().map(|t| (name(t.obs_a), name(t.obs_b), t.rows, t.cols, t.probs)).collect())
}

#[pyfunction]
#[pyo3(signature = (kind, settings, obs_a="external", obs_b="external"))]
fn chsh(kind: &str, settings: [f64; 4], obs_a: &str, obs_b: &str) -> PyResult<f64> {
    let st = ChshSettings::new(settings[0], settings[1], settings[2], settings[3]).map_err(err)?;
    measurement::chsh(parse(kind)?, &st, (parse(obs_a)?, parse(obs_b)?)).map_err(err)
}

#[pyfunction]
fn concurrence(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
    measures::concurrence(&to_cmat(rho)?).map_err(err)
}

#[pyfunction]
fn log_negativity(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
    measures::log_negativity(&to_cmat(rho)?, 2, 2).map_err(err)
}

/// `(c2_ab, c2_ac, c2_a_bc, residual)` for a three-qubit pure state.
#[pyfunction]
fn monogamy_pure(psi: Vec<Complex64>) -> PyResult<(f64, f64, f64, f64)> {
    let r = measures::monogamy_report_pure(&hyperent::linalg::CVec::from_vec(psi)).map_err(err)?;
    Ok((r.c2_ab, r.c2_ac, r.c2_a_bc, r.residual))
}

#[pyfunction]
fn singlet_fraction(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
    fidelity::singlet_fraction(&to_cmat(rho)?, 2).map_err(err)
}

#[pyfunction]
fn average_teleport_fidelity(rho: Vec<Vec<Complex64>>) -> PyResult<f64> {
    fidelity::average_teleport_fidelity(&to_cmat(rho)?).map_err(err)
}

/// `(p, f_g, F_g, predicted_f_g, residual)` on the two-parameter family.
#[pyfunction]
fn relation_check(p: f64, kind: &str, n: usize) -> PyResult<(f64, f64, f64, f64, f64)> {
    let layout = ChannelLayout::new(parse::<ChannelKind>(kind)?, n).map_err(err)?;
    let r = fidelity::relation_check(p, &layout, &FidelityParams::defaults(&layout)).map_err(err)?;
    Ok((r.p, r.f_g, r.big_f_g, r.predicted_f_g, r.residual))
}

#[pyfunction]
fn hhes_generalized_singlet_fraction(phases_ldru: [f64; 4]) -> PyResult<f64> {
    let layout = ChannelLayout::new(ChannelKind::Indistinguishable, 2).map_err(err)?;
    let rho = fidelity::hhes_channel(&phases(phases_ldru)?).map_err(err)?;
    fidelity::generalized_singlet_fraction(&rho, &layout).map_err(err)
}

#[pyfunction]
fn signaling_exact(n: usize) -> PyResult<f64> {
    protocols::signaling_exact(n).map_err(err)
}

/// `(estimate, stderr)`
#[pyfunction]
fn signaling_mc(n: usize, trials: u64, seed: u64) -> PyResult<(f64, f64)> {
    let e = protocols::signaling_mc(&SignalingConfig::new(n, trials, seed).map_err(err)?);
    Ok((e.estimate, e.stderr))
}

#[pyfunction]
fn qpq_sf(theta: f64, ancilla: &str) -> PyResult<f64> {
    protocols::qpq_sf(theta, parse::<Ancilla>(ancilla)?).map_err(err)
}

/// `(q, q_prime, q_alpha)`
#[pyfunction]
fn hardy_attack(theta: f64, phi: f64, alpha: f64) -> PyResult<(f64, f64, f64)> {
    let r = protocols::hardy_attack(&AttackConfig::new(theta, phi, alpha).map_err(err)?).map_err(err)?;
    Ok((r.q, r.q_prime, r.q_alpha))
}

/// The four Hardy probabilities for the state and settings fixed by `(theta, phi)`.
#[pyfunction]
fn hardy_probs(theta: f64, phi: f64) -> PyResult<[f64; 4]> {
    Ok(hardy::hardy_probs(&hardy::HardyParams::new(theta, phi).map_err(err)?))
}

#[pyfunction]
fn hardy_q(theta: f64, phi: f64) -> PyResult<f64> {
    Ok(hardy::hardy_q(&hardy::HardyParams::new(theta, phi).map_err(err)?))
}

/// `(theta, phi, q_max)`
#[pyfunction]
fn hardy_qmax() -> PyResult<(f64, f64, f64)> {
    let r = hardy::qmax_solve().map_err(err)?;
    Ok((r.theta, r.phi, r.q_max))
}

/// Run the command-line front end in-process; returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    hyperent::cli::run(std::iter::once("hyperent".to_string()).chain(args))
}

#[pymodule]
fn hyperent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensity>()?;
    m.add_function(wrap_pyfunction!(coincidence_tables, m)?)?;
    m.add_function(wrap_pyfunction!(chsh, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(log_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(monogamy_pure, m)?)?;
    m.add_function(wrap_pyfunction!(singlet_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(average_teleport_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(relation_check, m)?)?;
    m.add_function(wrap_pyfunction!(hhes_generalized_singlet_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(signaling_exact, m)?)?;
    m.add_function(wrap_pyfunction!(signaling_mc, m)?)?;
    m.add_function(wrap_pyfunction!(qpq_sf, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_attack, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_probs, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_q, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_qmax, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

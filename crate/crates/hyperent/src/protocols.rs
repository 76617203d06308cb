//! Protocol-level checks: the cloning/signaling gedanken experiment, the
//! ancilla comparison for the pseudo-telepathy state, two-particle swapping
//! and the exchange attack on Hardy's test.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{self, PhaseConfig};
use crate::error::{Error, Result};
use crate::fidelity::{self, ChannelKind, ChannelLayout};
use crate::hardy::{self, HardyParams};
use crate::linalg::{self, c, cis, CMat, CVec, C64};
use crate::measurement::{self, ChshSettings, CoincidenceTable, Observable};
use crate::qstate::DensityMatrix;

/// Largest DoF count handled by exact enumeration.
pub const MAX_SIGNALING_DOFS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalingConfig {
    pub n_dofs: usize,
    pub trials: u64,
    pub seed: u64,
}

impl SignalingConfig {
    pub fn new(n_dofs: usize, trials: u64, seed: u64) -> Result<Self> {
        if !(2..=MAX_SIGNALING_DOFS).contains(&n_dofs) {
            return Err(Error::InvalidParam(format!("N = {n_dofs} outside 2..={MAX_SIGNALING_DOFS}")));
        }
        if trials == 0 {
            return Err(Error::InvalidParam("trials must be positive".into()));
        }
        Ok(SignalingConfig { n_dofs, trials, seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Z,
    X,
}

/// Alice's four preparations: `|0>, |1>` in Z and `|+>, |->` in X.
fn preparation(basis: Basis, bit: bool) -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match (basis, bit) {
        (Basis::Z, false) => [c(1.0, 0.0), c(0.0, 0.0)],
        (Basis::Z, true) => [c(0.0, 0.0), c(1.0, 0.0)],
        (Basis::X, false) => [c(h, 0.0), c(h, 0.0)],
        (Basis::X, true) => [c(h, 0.0), c(-h, 0.0)],
    }
}

/// Bob guesses Z exactly when the detector is `D_1` or `D_{2^N}`.
fn guess(detector: usize, n: usize) -> Basis {
    if detector == 0 || detector == (1 << n) - 1 {
        Basis::Z
    } else {
        Basis::X
    }
}

/// Success probability of Bob's basis guess, summed over every detector of
/// the N-DoF sorter for each of Alice's four preparations.
pub fn signaling_exact(n_dofs: usize) -> Result<f64> {
    if !(2..=MAX_SIGNALING_DOFS).contains(&n_dofs) {
        return Err(Error::InvalidParam(format!("N = {n_dofs} outside 2..={MAX_SIGNALING_DOFS}")));
    }
    let mut p = 0.0;
    for basis in [Basis::Z, Basis::X] {
        for bit in [false, true] {
            let dist = circuits::sorter_cascade(n_dofs, preparation(basis, bit))?;
            let hit: f64 = dist.iter().enumerate().filter(|(k, _)| guess(*k, n_dofs) == basis).map(|(_, q)| q).sum();
            p += 0.25 * hit;
        }
    }
    Ok(p)
}

pub fn signaling_formula(n_dofs: usize) -> f64 {
    1.0 - 0.5f64.powi(n_dofs as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    /// The ideal copy channel is not a physical operation.
    pub non_physical: bool,
}

impl McEstimate {
    fn from_hits(hits: u64, trials: u64, seed: u64) -> Self {
        let p = hits as f64 / trials as f64;
        McEstimate { estimate: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials, seed, non_physical: true }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Teleport `q` through one DoF: a uniform Bell outcome followed by its
/// Pauli correction.
fn teleport_one<R: Rng>(q: &CVec, rng: &mut R) -> CVec {
    let k = rng.random_range(0..4usize);
    let s = linalg::pauli(k);
    let received = &s * q;
    &s * received
}

/// Sorter readout of a product of DoF qubits, one path bit per DoF.
fn sort_product<R: Rng>(qubits: &[CVec], rng: &mut R) -> usize {
    let n = qubits.len();
    let mut det = 0usize;
    for (i, q) in qubits.iter().enumerate() {
        let p1 = q[1].norm_sqr() / (q[0].norm_sqr() + q[1].norm_sqr());
        if rng.random::<f64>() < p1 {
            det |= 1 << (n - 1 - i);
        }
    }
    det
}

/// Monte-Carlo run of the cloning protocol: Alice picks a basis and a bit,
/// the decoded qubit is copied onto all N DoFs, each DoF is teleported and
/// Bob reads the sorter.
pub fn signaling_mc(cfg: &SignalingConfig) -> McEstimate {
    let n = cfg.n_dofs;
    let hits = (0..cfg.trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(cfg.seed, t);
            let basis = if rng.random::<bool>() { Basis::X } else { Basis::Z };
            let q = preparation(basis, rng.random::<bool>());
            let q = CVec::from_vec(q.to_vec());
            let copies: Vec<CVec> = (0..n).map(|_| teleport_one(&q, &mut rng)).collect();
            guess(sort_product(&copies, &mut rng), n) == basis
        })
        .count() as u64;
    McEstimate::from_hits(hits, cfg.trials, cfg.seed)
}

fn check_copies(m: usize) -> Result<()> {
    if !(1..=64).contains(&m) {
        return Err(Error::InvalidParam(format!("M = {m} outside 1..=64")));
    }
    Ok(())
}

/// Probability that Bob identifies an X-basis preparation with M two-DoF
/// copies: he fails only when every copy lands in `{D_1, D_4}`.
pub fn signaling_multicopy(m: usize) -> Result<f64> {
    check_copies(m)?;
    let mut miss = 0.0;
    for bit in [false, true] {
        let d = circuits::sorter_cascade(2, preparation(Basis::X, bit))?;
        miss += 0.5 * (d[0] + d[3]);
    }
    Ok(1.0 - miss.powi(m as i32))
}

/// [`signaling_multicopy`] averaged with the always-correct Z basis.
pub fn signaling_multicopy_averaged(m: usize) -> Result<f64> {
    Ok(0.5 + 0.5 * signaling_multicopy(m)?)
}

pub fn signaling_multicopy_mc(m: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    check_copies(m)?;
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be positive".into()));
    }
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, t);
            let q = CVec::from_vec(preparation(Basis::X, rng.random::<bool>()).to_vec());
            (0..m).any(|_| {
                let copies = [teleport_one(&q, &mut rng), teleport_one(&q, &mut rng)];
                guess(sort_product(&copies, &mut rng), 2) == Basis::X
            })
        })
        .count() as u64;
    Ok(McEstimate::from_hits(hits, trials, seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ancilla {
    Particle,
    Dof,
}

impl std::str::FromStr for Ancilla {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "particle" => Ok(Ancilla::Particle),
            "dof" => Ok(Ancilla::Dof),
            _ => Err(Error::InvalidParam(format!("unknown ancilla `{s}`"))),
        }
    }
}

/// Amplitude of `|b a x>` in the pseudo-telepathy state.
fn pseudo_amp(theta: f64, b: usize, a: usize, x: usize) -> f64 {
    let (s, co) = (theta / 2.0).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    h * match (b, a, x) {
        (0, 0, 0) | (1, 1, 1) => co,
        (0, 1, 0) => s,
        (1, 0, 0) => -s,
        _ => 0.0,
    }
}

/// Two-DoF channel between A and B. With a particle ancilla the ancilla is
/// traced and both second DoFs stay in `|0>`; with a DoF ancilla it is A's
/// second DoF and only B's second DoF is idle. Qubit order `a1 a2 b1 b2`.
pub fn qpq_state(theta: f64, ancilla: Ancilla) -> Result<DensityMatrix> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParam(format!("theta {theta} outside [0, pi/2]")));
    }
    let layout = ChannelLayout::new(ChannelKind::Distinguishable, 2)?;
    let mut rho = CMat::zeros(16, 16);
    match ancilla {
        Ancilla::Particle => {
            for x in 0..2 {
                let mut v = CVec::zeros(16);
                for a in 0..2 {
                    for b in 0..2 {
                        v[(a << 3) | (b << 1)] = c(pseudo_amp(theta, b, a, x), 0.0);
                    }
                }
                rho += linalg::outer(&v);
            }
        }
        Ancilla::Dof => {
            let mut v = CVec::zeros(16);
            for a in 0..2 {
                for x in 0..2 {
                    for b in 0..2 {
                        v[(a << 3) | (x << 2) | (b << 1)] = c(pseudo_amp(theta, b, a, x), 0.0);
                    }
                }
            }
            rho = linalg::outer(&v);
        }
    }
    layout.density(rho)
}

/// Generalized singlet fraction of [`qpq_state`].
pub fn qpq_sf(theta: f64, ancilla: Ancilla) -> Result<f64> {
    let layout = ChannelLayout::new(ChannelKind::Distinguishable, 2)?;
    fidelity::generalized_singlet_fraction(&qpq_state(theta, ancilla)?, &layout)
}

/// Published closed forms, reported next to the computed value.
pub fn qpq_formula(theta: f64, ancilla: Ancilla) -> f64 {
    let (s, co) = (theta / 2.0).sin_cos();
    match ancilla {
        Ancilla::Particle => 0.5 + co * co,
        Ancilla::Dof => 0.5 + co * co + 2.0 * co * s,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapReport {
    pub phi: f64,
    pub table: CoincidenceTable,
    pub total: f64,
    pub chsh_literature: f64,
    pub chsh_optimal: f64,
}

/// Polarization at Alice against path at Bob, plus CHSH on that pair.
pub fn swap_verify(phases: &PhaseConfig) -> Result<SwapReport> {
    let obs = (Observable::Internal, Observable::External);
    let table = measurement::coincidence_table(&circuits::swap_circuit(phases), obs.0, obs.1)?;
    Ok(SwapReport {
        phi: phases.phi(),
        total: table.total(),
        table,
        chsh_literature: measurement::chsh_with(circuits::swap_circuit, &ChshSettings::literature(), obs)?,
        chsh_optimal: measurement::chsh_with(circuits::swap_circuit, &ChshSettings::optimal(), obs)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub theta: f64,
    pub phi: f64,
    /// Probability that each particle reaches its intended party.
    pub alpha: f64,
}

impl AttackConfig {
    pub fn new(theta: f64, phi: f64, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParam(format!("alpha = {alpha} outside [0, 1]")));
        }
        HardyParams::new(theta, phi)?;
        Ok(AttackConfig { theta, phi, alpha })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub q: f64,
    pub q_prime: f64,
    pub q_alpha: f64,
}

/// Hardy probability after the two particles are exchanged, as printed:
/// `|cos chi (cos t - sin t e^{2i phi})/2 - sin chi e^{-i phi}(cos t - sin t)|^2`.
pub fn q_prime(p: &HardyParams) -> f64 {
    let (st, ct) = p.theta.sin_cos();
    let first = (c(ct, 0.0) - cis(2.0 * p.phi) * st) * (0.5 * p.chi.cos());
    let second = cis(-p.phi) * (p.chi.sin() * (ct - st));
    (first - second).norm_sqr()
}

/// `q_alpha = alpha^2 q + (1 - alpha)^2 q'`
pub fn hardy_attack(cfg: &AttackConfig) -> Result<AttackReport> {
    let p = HardyParams::new(cfg.theta, cfg.phi)?;
    let q = hardy::hardy_q(&p);
    let qp = q_prime(&p);
    let a = cfg.alpha;
    Ok(AttackReport { q, q_prime: qp, q_alpha: a * a * q + (1.0 - a) * (1.0 - a) * qp })
}

/// `P(++|A2,B2)` on the state with Alice's and Bob's qubits exchanged,
/// an independent evaluation of the exchange scenario.
pub fn q_exchanged(p: &HardyParams) -> f64 {
    let psi = p.state();
    let swapped = CVec::from_vec(vec![psi[0], psi[2], psi[1], psi[3]]);
    hardy::outcome_distribution(p, &linalg::outer(&swapped), 1, 1)[0]
}

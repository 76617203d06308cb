//! Output states of the optical networks: the hybrid-beam-splitter circuit,
//! the two-particle swap circuit, the DoF sorter cascade and the two-qubit
//! Hardy state with its gate decomposition.
//!
//! Layout shared by the first two circuits: Alice owns region `s1` with paths
//! L and D, Bob owns `s2` with paths R and U. DoF 0 is the internal mode,
//! DoF 1 the path, encoded `0 = L | R` and `1 = D | U`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, cis, CMat, CVec, C64};
pub use crate::qstate::ParticleKind;
use crate::qstate::{DofSpec, Ket, Particle, SymState};

pub const ALICE: &str = "s1";
pub const BOB: &str = "s2";
pub const INTERNAL: usize = 0;
pub const PATH: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub phi_l: f64,
    pub phi_d: f64,
    pub phi_r: f64,
    pub phi_u: f64,
}

impl PhaseConfig {
    pub fn new(phi_l: f64, phi_d: f64, phi_r: f64, phi_u: f64) -> Result<Self> {
        if ![phi_l, phi_d, phi_r, phi_u].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParam("phases must be finite".into()));
        }
        Ok(PhaseConfig { phi_l, phi_d, phi_r, phi_u })
    }

    pub fn zero() -> Self {
        PhaseConfig { phi_l: 0.0, phi_d: 0.0, phi_r: 0.0, phi_u: 0.0 }
    }

    /// Phases in degrees, order L, D, R, U.
    pub fn from_degrees(deg: [f64; 4]) -> Result<Self> {
        let r = deg.map(f64::to_radians);
        PhaseConfig::new(r[0], r[1], r[2], r[3])
    }

    /// Settings that realize `phi_A = phi_D - phi_L` and `phi_B = phi_R - phi_U`.
    pub fn from_settings(phi_a: f64, phi_b: f64) -> Self {
        PhaseConfig { phi_l: 0.0, phi_d: phi_a, phi_r: phi_b, phi_u: 0.0 }
    }

    /// `(phi_D - phi_L - phi_R + phi_U) / 2`
    pub fn phi(&self) -> f64 {
        (self.phi_d - self.phi_l - self.phi_r + self.phi_u) / 2.0
    }

    pub fn shifted(&self, d: f64) -> Self {
        PhaseConfig { phi_l: self.phi_l + d, phi_d: self.phi_d + d, phi_r: self.phi_r + d, phi_u: self.phi_u + d }
    }
}

pub fn path_label(region: &str, v: u8) -> &'static str {
    match (region, v) {
        (ALICE, 0) => "L",
        (ALICE, _) => "D",
        (_, 0) => "R",
        _ => "U",
    }
}

fn hbs_dofs(internal: &str, labels: [&str; 2]) -> Vec<DofSpec> {
    vec![
        DofSpec::new(internal, &labels).expect("static labels"),
        DofSpec::new("path", &["0", "1"]).expect("static labels"),
    ]
}

fn particle(terms: &[(Ket, C64)]) -> Particle {
    terms.to_vec()
}

/// Two particles after the hybrid-beam-splitter network, spin locked to
/// path as L-down, D-up, R-down, U-up.
pub fn li_circuit(kind: ParticleKind, phases: &PhaseConfig) -> SymState {
    let (up, down) = (0u8, 1u8);
    let dn_r = Ket::new(BOB, &[down, 0]);
    let up_u = Ket::new(BOB, &[up, 1]);
    let up_d = Ket::new(ALICE, &[up, 1]);
    let dn_l = Ket::new(ALICE, &[down, 0]);
    let i = c(0.0, 1.0);
    let h = c(0.5, 0.0);
    let (er, ed, el, eu) = (cis(phases.phi_r), cis(phases.phi_d), cis(phases.phi_l), cis(phases.phi_u));
    let p1 = particle(&[
        (dn_r.clone(), h * er),
        (up_u.clone(), h * er * i),
        (up_d.clone(), h * i * ed),
        (dn_l.clone(), h * i * ed * i),
    ]);
    let p2 = particle(&[(dn_l, h * el), (up_d, h * el * i), (up_u, h * i * eu), (dn_r, h * i * eu * i)]);
    let dofs = hbs_dofs("spin", ["up", "down"]);
    let s = SymState::from_particles(kind, dofs, &[p1, p2]).expect("well-formed circuit kets");
    if kind == ParticleKind::Distinguishable {
        s.with_labels(&["1", "2"])
    } else {
        s
    }
}

/// Two bosons after the swap network; polarization is H everywhere except
/// on path D.
pub fn swap_circuit(phases: &PhaseConfig) -> SymState {
    let (hp, vp) = (0u8, 1u8);
    let h_r = Ket::new(BOB, &[hp, 0]);
    let h_u = Ket::new(BOB, &[hp, 1]);
    let v_d = Ket::new(ALICE, &[vp, 1]);
    let h_l = Ket::new(ALICE, &[hp, 0]);
    let i = c(0.0, 1.0);
    let h = c(0.5, 0.0);
    let (er, ed, el, eu) = (cis(phases.phi_r), cis(phases.phi_d), cis(phases.phi_l), cis(phases.phi_u));
    let p1 = particle(&[(h_r.clone(), h * er), (h_u.clone(), h * er * i), (v_d.clone(), h * i * ed), (h_l.clone(), h * i * ed * i)]);
    let p2 = particle(&[(h_l, h * el), (v_d, h * el * i), (h_u, h * i * eu), (h_r, h * i * eu * i)]);
    let dofs = hbs_dofs("polarization", ["H", "V"]);
    SymState::from_particles(ParticleKind::Boson, dofs, &[p1, p2]).expect("well-formed circuit kets")
}

/// Detector distribution of the N-level sorter cascade when every DoF holds
/// `input`. Detector `D_{k+1}` corresponds to the bit string of `k`, DoF 1
/// being the most significant bit, so `D_1` is all-zero and `D_{2^N}` all-one.
pub fn sorter_cascade(n_dofs: usize, input: [C64; 2]) -> Result<Vec<f64>> {
    sorter_cascade_product(&vec![input; n_dofs])
}

/// Sorter statistics for a product of possibly different DoF qubits.
pub fn sorter_cascade_product(inputs: &[[C64; 2]]) -> Result<Vec<f64>> {
    let n = inputs.len();
    if n == 0 || n > 20 {
        return Err(Error::InvalidParam(format!("sorter depth {n} outside 1..=20")));
    }
    let probs: Vec<[f64; 2]> = inputs
        .iter()
        .map(|q| {
            let nrm = q[0].norm_sqr() + q[1].norm_sqr();
            if nrm > 0.0 {
                Ok([q[0].norm_sqr() / nrm, q[1].norm_sqr() / nrm])
            } else {
                Err(Error::Degenerate("zero input qubit".into()))
            }
        })
        .collect::<Result<_>>()?;
    let mut out = vec![1.0; 1 << n];
    for (k, p) in out.iter_mut().enumerate() {
        for (i, q) in probs.iter().enumerate() {
            *p *= q[(k >> (n - 1 - i)) & 1];
        }
    }
    Ok(out)
}

pub mod gates {
    use super::*;

    pub fn u3(theta: f64, phi: f64, lambda: f64) -> CMat {
        let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        CMat::from_row_slice(
            2,
            2,
            &[c(co, 0.0), -cis(lambda) * s, cis(phi) * s, cis(phi + lambda) * co],
        )
    }

    pub fn u1(lambda: f64) -> CMat {
        CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), cis(lambda)])
    }

    /// Real rotation `[[cos, -sin], [sin, cos]]`.
    pub fn ub(theta: f64) -> CMat {
        u3(2.0 * theta, 0.0, 0.0)
    }

    pub fn up(phi: f64) -> CMat {
        u1(phi)
    }

    pub fn identity() -> CMat {
        CMat::identity(2, 2)
    }

    /// Control on the first (most significant) qubit.
    pub fn cnot() -> CMat {
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        CMat::from_row_slice(4, 4, &[l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o])
    }

    /// Controlled phase `e^{2 i lambda}` on `|11>` built from U1 and CNOT.
    pub fn uc(lambda: f64) -> CMat {
        let m1 = identity().kronecker(&u1(-lambda));
        let m2 = u1(lambda).kronecker(&u1(-lambda));
        let m3 = identity().kronecker(&u1(2.0 * lambda));
        m3 * cnot() * m2 * cnot() * m1
    }
}

#[derive(Clone, Debug)]
pub struct HardyStates {
    pub analytic: CVec,
    pub gate_built: CVec,
}

/// `cos t/sqrt2 (|00>+|10>) + sin t/sqrt2 (|01> + e^{2i phi}|11>)`, qubit A first.
pub fn hardy_state(theta: f64, phi: f64) -> HardyStates {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (s, co) = (theta.sin(), theta.cos());
    let analytic = CVec::from_vec(vec![c(co * r, 0.0), c(s * r, 0.0), c(co * r, 0.0), cis(2.0 * phi) * s * r]);
    let prep = gates::ub(std::f64::consts::FRAC_PI_4).kronecker(&gates::ub(theta));
    let mut zero = CVec::zeros(4);
    zero[0] = c(1.0, 0.0);
    let gate_built = gates::uc(phi) * prep * zero;
    HardyStates { analytic, gate_built }
}

/// `|<a|b>|`, insensitive to global phase.
pub fn overlap_abs(a: &CVec, b: &CVec) -> f64 {
    a.dotc(b).norm()
}

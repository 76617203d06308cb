//! Singlet fraction, its generalization over DoF pairs, a simulated
//! teleportation fidelity and the two-parameter channel family.
//!
//! Channels are two-party states on `n` qubit DoFs per party. The pairwise
//! reductions go through [`trace::reduce_to_qubits`], so labeled channels use
//! the ordinary partial trace and identical-particle channels the coherent
//! DoF trace.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{self, PhaseConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMat, CVec, C64};
use crate::qstate::{DensityMatrix, DofSpec, Ket, ParticleKind, Tuple};
use crate::trace;

/// Restarts used by the singlet-fraction maximizer.
pub const SF_RESTARTS: usize = 32;
/// Step size at which coordinate refinement stops.
pub const SF_STEP_TOL: f64 = 1e-8;
/// Restarts must agree this closely with the best value.
pub const SF_AGREE_TOL: f64 = 1e-6;
const SF_SEED: u64 = 0x5f1e_7a11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Distinguishable,
    Indistinguishable,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Distinguishable => "distinguishable",
            ChannelKind::Indistinguishable => "indistinguishable",
        })
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "distinguishable" | "dist" => Ok(ChannelKind::Distinguishable),
            "indistinguishable" | "indist" => Ok(ChannelKind::Indistinguishable),
            _ => Err(Error::InvalidParam(format!("unknown channel kind `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelLayout {
    pub kind: ChannelKind,
    pub n: usize,
    pub d: usize,
    /// Party labels: particle slots A, B or regions s^x, s^y.
    pub parties: [String; 2],
}

impl ChannelLayout {
    pub fn new(kind: ChannelKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("a channel needs at least one DoF per party".into()));
        }
        Ok(ChannelLayout {
            kind,
            n,
            d: 2,
            parties: [circuits::ALICE.to_string(), circuits::BOB.to_string()],
        })
    }

    pub fn particle_kind(&self) -> ParticleKind {
        match self.kind {
            ChannelKind::Distinguishable => ParticleKind::Distinguishable,
            ChannelKind::Indistinguishable => ParticleKind::Boson,
        }
    }

    pub fn dofs(&self) -> Vec<DofSpec> {
        (0..self.n).map(|j| DofSpec::qubit(&format!("q{j}"))).collect()
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n
    }

    /// Wrap a `4^n`-dim matrix with qubit order `a_1..a_n b_1..b_n` (first
    /// qubit most significant) as a one-particle-per-party density matrix.
    pub fn density(&self, data: CMat) -> Result<DensityMatrix> {
        let dim = 1usize << self.n_qubits();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::Shape(format!("expected {dim}x{dim}, got {}x{}", data.nrows(), data.ncols())));
        }
        let n = self.n;
        let bits = |x: usize| -> Vec<u8> { (0..n).map(|j| ((x >> (n - 1 - j)) & 1) as u8).collect() };
        let basis: Vec<Tuple> = (0..dim)
            .map(|i| {
                vec![
                    Ket::new(&self.parties[0], &bits(i >> n)),
                    Ket::new(&self.parties[1], &bits(i & ((1 << n) - 1))),
                ]
            })
            .collect();
        DensityMatrix::new(self.particle_kind(), self.dofs(), basis, data)
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        if self.d != 2 {
            return Err(Error::InvalidParam(format!("only d = 2 is supported, got {}", self.d)));
        }
        if rho.dofs.len() != self.n {
            return Err(Error::Shape(format!("layout has {} DoFs, state has {}", self.n, rho.dofs.len())));
        }
        if (rho.kind == ParticleKind::Distinguishable) != (self.kind == ChannelKind::Distinguishable) {
            return Err(Error::InvalidParam(format!("{} layout on a {} state", self.kind, rho.kind)));
        }
        let regions = rho.regions();
        for p in &self.parties {
            if !regions.contains(p) {
                return Err(Error::UnknownRegion(p.clone()));
            }
        }
        Ok(())
    }

    /// Reduced two-qubit channel between DoF `i` of party A and `j` of B.
    pub fn pair(&self, rho: &DensityMatrix, i: usize, j: usize) -> Result<CMat> {
        if i >= self.n {
            return Err(Error::DofOutOfRange(i));
        }
        if j >= self.n {
            return Err(Error::DofOutOfRange(j));
        }
        trace::reduce_to_qubits(rho, &[(self.parties[0].clone(), i), (self.parties[1].clone(), j)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityParams {
    pub f_max: f64,
    #[serde(rename = "F_max")]
    pub big_f_max: f64,
}

impl FidelityParams {
    pub const DEFAULT_INDIST_F_MAX: f64 = 5.0 / 6.0;

    /// `F_max` is what the two-parameter family reaches at `p = 1`:
    /// `1 + (n-1)/d^2` for labeled particles, `n` for identical ones.
    pub fn defaults(layout: &ChannelLayout) -> Self {
        let n = layout.n as f64;
        let d = layout.d as f64;
        match layout.kind {
            ChannelKind::Distinguishable => FidelityParams { f_max: 1.0, big_f_max: 1.0 + (n - 1.0) / (d * d) },
            ChannelKind::Indistinguishable => FidelityParams { f_max: Self::DEFAULT_INDIST_F_MAX, big_f_max: n },
        }
    }

    pub fn with_f_max(layout: &ChannelLayout, f_max: f64) -> Result<Self> {
        let d = layout.d as f64;
        if !(f_max > 1.0 / d && f_max <= 1.0) {
            return Err(Error::InvalidParam(format!("f_max = {f_max} outside (1/d, 1]")));
        }
        if layout.kind == ChannelKind::Distinguishable && f_max != 1.0 {
            return Err(Error::InvalidParam("labeled channels have f_max = 1".into()));
        }
        Ok(FidelityParams { f_max, ..Self::defaults(layout) })
    }
}

/// `U = e^{i g} U3(t, p, l)` with angles `[t, p, l, g]`.
fn unitary(a: &[f64; 4]) -> [[C64; 2]; 2] {
    let (s, co) = (a[0] / 2.0).sin_cos();
    let g = cis(a[3]);
    [
        [g * co, -g * cis(a[2]) * s],
        [g * cis(a[1]) * s, g * cis(a[1] + a[2]) * co],
    ]
}

fn as_cmat(u: &[[C64; 2]; 2]) -> CMat {
    CMat::from_fn(2, 2, |r, k| u[r][k])
}

/// `<psi_U| rho |psi_U>` with `psi_U = (1 x U)|Phi+>`.
fn mes_overlap(rho: &[[C64; 4]; 4], a: &[f64; 4]) -> f64 {
    let u = unitary(a);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = [C64::new(0.0, 0.0); 4];
    for x in 0..2 {
        for y in 0..2 {
            psi[2 * x + y] = u[y][x] * h;
        }
    }
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..4 {
        let mut row = C64::new(0.0, 0.0);
        for k in 0..4 {
            row += rho[r][k] * psi[k];
        }
        acc += psi[r].conj() * row;
    }
    acc.re
}

fn ascend(rho: &[[C64; 4]; 4], mut x: [f64; 4]) -> ([f64; 4], f64) {
    let mut fx = mes_overlap(rho, &x);
    let mut h = 0.5;
    while h >= SF_STEP_TOL {
        let mut moved = false;
        for k in 0..3 {
            for dir in [1.0, -1.0] {
                loop {
                    let mut y = x;
                    y[k] += dir * h;
                    let fy = mes_overlap(rho, &y);
                    if fy > fx + 1e-15 {
                        x = y;
                        fx = fy;
                        moved = true;
                    } else {
                        break;
                    }
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (x, fx)
}

#[derive(Clone, Debug)]
pub struct SfOutcome {
    pub value: f64,
    /// Maximizing local unitary on B: the closest MES is `(1 x U)|Phi+>`.
    pub unitary: CMat,
    pub agreeing: usize,
}

fn check_two_qubit(rho: &CMat, d: usize) -> Result<[[C64; 4]; 4]> {
    if d != 2 {
        return Err(Error::InvalidParam(format!("only d = 2 is supported, got {d}")));
    }
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::Shape(format!("expected 4x4, got {}x{}", rho.nrows(), rho.ncols())));
    }
    let mut a = [[C64::new(0.0, 0.0); 4]; 4];
    for (r, row) in a.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = rho[(r, k)];
        }
    }
    Ok(a)
}

/// Multi-start maximization of the overlap with maximally entangled states.
/// Fails with [`Error::Numeric`] when no second restart reproduces the best
/// value within [`SF_AGREE_TOL`].
pub fn singlet_fraction_detail(rho: &CMat, d: usize) -> Result<SfOutcome> {
    let a = check_two_qubit(rho, d)?;
    let runs: Vec<([f64; 4], f64)> = (0..SF_RESTARTS)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(SF_SEED);
            rng.set_stream(k as u64);
            let tau = std::f64::consts::TAU;
            let x0 = [
                rng.random::<f64>() * std::f64::consts::PI,
                rng.random::<f64>() * tau,
                rng.random::<f64>() * tau,
                0.0,
            ];
            ascend(&a, x0)
        })
        .collect();
    let (best_x, best) = runs.iter().copied().max_by(|p, q| p.1.total_cmp(&q.1)).expect("restarts");
    let agreeing = runs.iter().filter(|r| best - r.1 <= SF_AGREE_TOL).count();
    if agreeing < 2 {
        return Err(Error::Numeric(format!("singlet fraction restarts disagree (best {best})")));
    }
    Ok(SfOutcome { value: best, unitary: as_cmat(&unitary(&best_x)), agreeing })
}

pub fn singlet_fraction(rho: &CMat, d: usize) -> Result<f64> {
    Ok(singlet_fraction_detail(rho, d)?.value)
}

/// Pairwise singlet fractions, `sf[i][j]` for DoF `i` of A and `j` of B.
pub fn pairwise_singlet_fractions(rho: &DensityMatrix, layout: &ChannelLayout) -> Result<Vec<Vec<f64>>> {
    layout.check(rho)?;
    let n = layout.n;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let vals = pairs
        .iter()
        .map(|&(i, j)| singlet_fraction(&layout.pair(rho, i, j)?, layout.d))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.chunks(n).map(|r| r.to_vec()).collect())
}

/// Largest row or column sum of the pairwise singlet fractions.
pub fn generalized_singlet_fraction(rho: &DensityMatrix, layout: &ChannelLayout) -> Result<f64> {
    let sf = pairwise_singlet_fractions(rho, layout)?;
    let n = layout.n;
    let rows = (0..n).map(|i| sf[i].iter().sum::<f64>());
    let cols = (0..n).map(|j| (0..n).map(|i| sf[i][j]).sum::<f64>());
    Ok(rows.chain(cols).fold(f64::NEG_INFINITY, f64::max))
}

/// The six Pauli-axis input states.
pub fn axis_states() -> Vec<CVec> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: C64, b: C64| CVec::from_vec(vec![a, b]);
    vec![
        v(c(1.0, 0.0), c(0.0, 0.0)),
        v(c(0.0, 0.0), c(1.0, 0.0)),
        v(c(h, 0.0), c(h, 0.0)),
        v(c(h, 0.0), c(-h, 0.0)),
        v(c(h, 0.0), c(0.0, h)),
        v(c(h, 0.0), c(0.0, -h)),
    ]
}

/// Teleport `input` through the two-qubit channel `rho` (A = Alice's half,
/// B = Bob's). Bob first applies the local rotation that best aligns the
/// channel with `|Phi+>`; Alice then makes a Bell measurement on the input
/// and her half and Bob applies the Pauli correction. Returns
/// `<input|rho_out|input>`.
pub fn teleport_fidelity(rho: &CMat, input: &CVec) -> Result<f64> {
    check_two_qubit(rho, 2)?;
    if input.len() != 2 || (input.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParam("input must be a normalized qubit".into()));
    }
    let sf = singlet_fraction_detail(rho, 2)?;
    let out = teleport_output(rho, &sf.unitary, input);
    Ok(linalg::fidelity_pure(input, &out))
}

fn teleport_output(rho: &CMat, u: &CMat, input: &CVec) -> CMat {
    let id = CMat::identity(2, 2);
    let rot = linalg::kron(&id, &u.adjoint());
    let chan = &rot * rho * rot.adjoint();
    // qubit order: input C, A, B
    let total = linalg::kron(&linalg::outer(input), &chan);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi_plus = CVec::from_vec(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    let mut out = CMat::zeros(2, 2);
    for k in 0..4 {
        let sk = linalg::pauli(k);
        let bell = linalg::kron(&id, &sk) * &phi_plus;
        // (<bell| x 1) acting from the left on C,A
        let bra = CMat::from_fn(1, 4, |_, k| bell[k].conj());
        let proj = linalg::kron(&bra, &id);
        let bob = &proj * &total * proj.adjoint();
        out += &sk * bob * sk.adjoint();
    }
    out
}

/// Average of [`teleport_fidelity`] over the six axis states.
pub fn average_teleport_fidelity(rho: &CMat) -> Result<f64> {
    check_two_qubit(rho, 2)?;
    let sf = singlet_fraction_detail(rho, 2)?;
    let states = axis_states();
    let sum: f64 = states
        .iter()
        .map(|s| linalg::fidelity_pure(s, &teleport_output(rho, &sf.unitary, s)))
        .sum();
    Ok(sum / states.len() as f64)
}

/// Best average teleportation fidelity over DoF pairs. Identical-particle
/// channels are rescaled by their visibility so a perfect pair reaches
/// `f_max` rather than one.
pub fn generalized_teleportation_fidelity(
    rho: &DensityMatrix,
    layout: &ChannelLayout,
    params: &FidelityParams,
) -> Result<f64> {
    layout.check(rho)?;
    let n = layout.n;
    let mut raw = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            raw = raw.max(average_teleport_fidelity(&layout.pair(rho, i, j)?)?);
        }
    }
    let inv = 1.0 / layout.d as f64;
    Ok(inv + (raw - inv) * (params.f_max - inv) / (1.0 - inv))
}

/// The fully entangled endpoint of the two-parameter family.
pub fn family_endpoint(layout: &ChannelLayout) -> Result<DensityMatrix> {
    let n = layout.n;
    let dim = 1usize << (2 * n);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let data = match layout.kind {
        ChannelKind::Distinguishable => {
            // Bell pair on (a_1, b_1), everything else maximally mixed
            let mut bell = CVec::zeros(4);
            bell[0] = c(h, 0.0);
            bell[3] = c(h, 0.0);
            let rest = 1usize << (n - 1);
            let mixed = CMat::identity(rest, rest) / c(rest as f64, 0.0);
            // order a_1 b_1 (a_2..a_n) (b_2..b_n) then permute
            let ordered = linalg::kron(&linalg::kron(&linalg::outer(&bell), &mixed), &mixed);
            let perm: Vec<usize> = (0..dim)
                .map(|x| {
                    let a = x >> n;
                    let b = x & ((1 << n) - 1);
                    let a1 = a >> (n - 1);
                    let b1 = b >> (n - 1);
                    let ar = a & (rest - 1);
                    let br = b & (rest - 1);
                    (((a1 << 1) | b1) * rest + ar) * rest + br
                })
                .collect();
            CMat::from_fn(dim, dim, |r, k| ordered[(perm[r], perm[k])])
        }
        ChannelKind::Indistinguishable => {
            // every (i, j) pair maximally entangled
            let mut v = CVec::zeros(dim);
            v[0] = c(h, 0.0);
            v[dim - 1] = c(h, 0.0);
            linalg::outer(&v)
        }
    };
    layout.density(data)
}

/// `p P + (1 - p) 1/d^{2n}`.
pub fn two_param_state(p: f64, layout: &ChannelLayout) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParam(format!("p = {p} outside [0, 1]")));
    }
    let mut rho = family_endpoint(layout)?;
    let dim = rho.dim();
    rho.data = &rho.data * c(p, 0.0) + CMat::identity(dim, dim) * c((1.0 - p) / dim as f64, 0.0);
    Ok(rho)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub p: f64,
    pub f_g: f64,
    #[serde(rename = "F_g")]
    pub big_f_g: f64,
    pub predicted_f_g: f64,
    pub residual: f64,
}

/// Predicted `f_g` from `F_g` by the linear relation between the endpoints.
pub fn predicted_f(big_f: f64, layout: &ChannelLayout, params: &FidelityParams) -> f64 {
    let n = layout.n as f64;
    let d = layout.d as f64;
    let f0 = n / (d * d);
    (big_f - f0) * (params.f_max - 1.0 / d) / (params.big_f_max - f0) + 1.0 / d
}

pub fn relation_check(p: f64, layout: &ChannelLayout, params: &FidelityParams) -> Result<RelationRecord> {
    let rho = two_param_state(p, layout)?;
    let f_g = generalized_teleportation_fidelity(&rho, layout, params)?;
    let big_f_g = generalized_singlet_fraction(&rho, layout)?;
    let predicted_f_g = predicted_f(big_f_g, layout, params);
    Ok(RelationRecord { p, f_g, big_f_g, predicted_f_g, residual: f_g - predicted_f_g })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SfBoundReport {
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    pub bound: f64,
    pub max_observed: f64,
    pub violations: usize,
}

/// `F_g <= 1 + (n-1)/d` on Haar-random pure labeled-particle channels.
pub fn sf_upper_bound_check(layout: &ChannelLayout, samples: usize, seed: u64) -> Result<SfBoundReport> {
    if layout.kind != ChannelKind::Distinguishable {
        return Err(Error::InvalidParam("the bound applies to labeled particles".into()));
    }
    let n = layout.n;
    let bound = 1.0 + (n as f64 - 1.0) / layout.d as f64;
    let vals = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let psi = linalg::random_state(1 << (2 * n), &mut rng);
            generalized_singlet_fraction(&layout.density(linalg::outer(&psi))?, layout)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SfBoundReport {
        n,
        d: layout.d,
        samples,
        bound,
        max_observed: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        violations: vals.iter().filter(|&&v| v > bound + 1e-6).count(),
    })
}

/// Labeled two-photon state hyperentangled in polarization and OAM,
/// `cos t |H,+l>|V,-l> + e^{i phi} sin t |V,-l>|H,+l>`.
pub fn dishhes_state(theta: f64, phi: f64) -> Result<DensityMatrix> {
    let layout = ChannelLayout::new(ChannelKind::Distinguishable, 2)?;
    let mut v = CVec::zeros(16);
    // a = (pol, oam) of the signal, b of the idler; H = +l = 0
    v[0b0011] = c(theta.cos(), 0.0);
    v[0b1100] = cis(phi) * theta.sin();
    let mut rho = layout.density(linalg::outer(&v))?;
    rho.dofs = vec![
        DofSpec::new("polarization", &["H", "V"])?,
        DofSpec::new("oam", &["+l", "-l"])?,
    ];
    Ok(rho)
}

/// The projected two-DoF boson circuit state as a channel between Alice's
/// and Bob's regions.
pub fn hhes_channel(phases: &PhaseConfig) -> Result<DensityMatrix> {
    let s = circuits::li_circuit(ParticleKind::Boson, phases);
    let p = trace::project_state_one_per_region(&s, &[circuits::ALICE, circuits::BOB])?;
    p.to_density()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures;

    fn bell() -> CMat {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        linalg::outer(&CVec::from_vec(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]))
    }

    /// Closed form for two qubits: largest eigenvalue of the real part of
    /// rho in the magic basis.
    fn magic_oracle(rho: &CMat) -> f64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        let m = CMat::from_row_slice(
            4,
            4,
            &[
                c(h, 0.0), z, z, c(h, 0.0),
                c(0.0, h), z, z, c(0.0, -h),
                z, c(0.0, h), c(0.0, h), z,
                z, c(h, 0.0), c(-h, 0.0), z,
            ],
        );
        let rm = &m * rho * m.adjoint();
        let re = CMat::from_fn(4, 4, |r, k| c(rm[(r, k)].re, 0.0));
        *linalg::herm_eigenvalues(&re).last().unwrap()
    }

    fn grid_oracle(rho: &CMat) -> f64 {
        let a = check_two_qubit(rho, 2).unwrap();
        let g = 22;
        let mut best = f64::NEG_INFINITY;
        for i in 0..g {
            for j in 0..g {
                for k in 0..g {
                    let x = [
                        std::f64::consts::PI * i as f64 / (g - 1) as f64,
                        std::f64::consts::TAU * j as f64 / g as f64,
                        std::f64::consts::TAU * k as f64 / g as f64,
                        0.0,
                    ];
                    best = best.max(mes_overlap(&a, &x));
                }
            }
        }
        best
    }

    #[test]
    fn sf_basic_values() {
        assert!((singlet_fraction(&bell(), 2).unwrap() - 1.0).abs() < 1e-9);
        let mixed = CMat::identity(4, 4) / c(4.0, 0.0);
        assert!((singlet_fraction(&mixed, 2).unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn sf_matches_oracles_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..20 {
            let rho = linalg::random_density(4, 1 + k % 4, &mut rng);
            let sf = singlet_fraction(&rho, 2).unwrap();
            assert!((sf - magic_oracle(&rho)).abs() < 1e-7, "magic {k}");
            let grid = grid_oracle(&rho);
            assert!(grid <= sf + 1e-9 && sf - grid < 1e-2, "grid {k}: {grid} vs {sf}");
        }
    }

    #[test]
    fn sf_grid_oracle_agrees_within_1e4_near_grid_points() {
        // states whose optimum sits on a grid node
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let x = [
                std::f64::consts::PI * rng.random_range(0..22) as f64 / 21.0,
                std::f64::consts::TAU * rng.random_range(0..22) as f64 / 22.0,
                std::f64::consts::TAU * rng.random_range(0..22) as f64 / 22.0,
                0.0,
            ];
            let u = as_cmat(&unitary(&x));
            let rot = linalg::kron(&CMat::identity(2, 2), &u);
            let p: f64 = rng.random_range(0.2..1.0);
            let rho = (&rot * bell() * rot.adjoint()) * c(p, 0.0) + CMat::identity(4, 4) * c((1.0 - p) / 4.0, 0.0);
            assert!((singlet_fraction(&rho, 2).unwrap() - grid_oracle(&rho)).abs() < 1e-4);
        }
    }

    #[test]
    fn sf_rejects_other_dimensions() {
        assert!(singlet_fraction(&CMat::identity(9, 9), 3).is_err());
    }

    #[test]
    fn teleport_bell_is_perfect_and_mixed_is_half() {
        for s in axis_states() {
            assert!((teleport_fidelity(&bell(), &s).unwrap() - 1.0).abs() < 1e-9);
        }
        let mixed = CMat::identity(4, 4) / c(4.0, 0.0);
        assert!((average_teleport_fidelity(&mixed).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn teleport_through_werner_channel() {
        for p in [0.0, 0.3, 0.7, 1.0] {
            let rho = bell() * c(p, 0.0) + CMat::identity(4, 4) * c((1.0 - p) / 4.0, 0.0);
            let f = average_teleport_fidelity(&rho).unwrap();
            assert!((f - (p + (1.0 - p) / 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn dishhes_pairs_have_half_singlet_fraction() {
        let rho = dishhes_state(0.4, 1.1).unwrap();
        let layout = ChannelLayout::new(ChannelKind::Distinguishable, 2).unwrap();
        for row in pairwise_singlet_fractions(&rho, &layout).unwrap() {
            for v in row {
                assert!((v - 0.5).abs() < 1e-6);
            }
        }
        assert!((generalized_singlet_fraction(&rho, &layout).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hhes_reaches_two() {
        let rho = hhes_channel(&PhaseConfig::new(0.3, 1.2, -0.4, 0.9).unwrap()).unwrap();
        let layout = ChannelLayout::new(ChannelKind::Indistinguishable, 2).unwrap();
        assert!((generalized_singlet_fraction(&rho, &layout).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn endpoint_pairs() {
        for n in 1..=3 {
            for kind in [ChannelKind::Distinguishable, ChannelKind::Indistinguishable] {
                let layout = ChannelLayout::new(kind, n).unwrap();
                let rho = family_endpoint(&layout).unwrap();
                assert!(rho.is_valid(1e-12));
                let c11 = measures::concurrence(&layout.pair(&rho, 0, 0).unwrap()).unwrap();
                assert!((c11 - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn relation_endpoints() {
        let layout = ChannelLayout::new(ChannelKind::Indistinguishable, 2).unwrap();
        let params = FidelityParams::defaults(&layout);
        let r1 = relation_check(1.0, &layout, &params).unwrap();
        assert!((r1.f_g - params.f_max).abs() < 1e-9 && (r1.big_f_g - params.big_f_max).abs() < 1e-6);
        let r0 = relation_check(0.0, &layout, &params).unwrap();
        assert!((r0.f_g - 0.5).abs() < 1e-9 && (r0.big_f_g - 0.5).abs() < 1e-6);
    }

    #[test]
    fn two_param_rejects_bad_p() {
        let layout = ChannelLayout::new(ChannelKind::Distinguishable, 1).unwrap();
        assert!(two_param_state(1.5, &layout).is_err());
    }
}

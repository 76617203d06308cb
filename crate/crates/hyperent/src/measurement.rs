//! Coincidence tables, normalized correlators and CHSH values for the
//! two-party circuit outputs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuits::{self, PhaseConfig, ALICE, BOB, INTERNAL, PATH};
use crate::error::{Error, Result};
use crate::qstate::{ParticleKind, SymState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    Internal,
    External,
}

impl Observable {
    fn dof(self) -> usize {
        match self {
            Observable::Internal => INTERNAL,
            Observable::External => PATH,
        }
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "internal" | "spin" | "polarization" => Ok(Observable::Internal),
            "external" | "path" => Ok(Observable::External),
            _ => Err(Error::InvalidParam(format!("unknown observable `{s}`"))),
        }
    }
}

/// Joint probabilities of one detection on each side. Rows are Alice's
/// outcomes and columns Bob's, both in label order of the measured DoF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceTable {
    pub obs_a: Observable,
    pub obs_b: Observable,
    pub rows: [String; 2],
    pub cols: [String; 2],
    pub probs: [[f64; 2]; 2],
}

impl CoincidenceTable {
    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.cols.iter().position(|c| c == col)?;
        Some(self.probs[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("A\\B,{},{}\n", self.cols[0], self.cols[1]);
        for i in 0..2 {
            s += &format!("{},{},{}\n", self.rows[i], self.probs[i][0], self.probs[i][1]);
        }
        s
    }
}

impl fmt::Display for CoincidenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8} | {:>12} {:>12}", "", format!("B:{}", self.cols[0]), format!("B:{}", self.cols[1]))?;
        for i in 0..2 {
            writeln!(f, "{:>8} | {:>12.9} {:>12.9}", format!("A:{}", self.rows[i]), self.probs[i][0], self.probs[i][1])?;
        }
        Ok(())
    }
}

fn outcome_labels(s: &SymState, region: &str, obs: Observable) -> [String; 2] {
    match obs {
        Observable::External => [0u8, 1].map(|v| circuits::path_label(region, v).to_string()),
        Observable::Internal => {
            let l = &s.dofs()[INTERNAL].labels;
            [l[0].clone(), l[1].clone()]
        }
    }
}

/// Exact coincidence probabilities: squared Fock amplitudes of the terms
/// with exactly one particle in each party's region.
pub fn coincidence_table(state: &SymState, obs_a: Observable, obs_b: Observable) -> Result<CoincidenceTable> {
    for (o, side) in [(obs_a, "A"), (obs_b, "B")] {
        if o.dof() >= state.dofs().len() || state.dofs()[o.dof()].dim() != 2 {
            return Err(Error::InvalidParam(format!("observable {o:?} not available on side {side}")));
        }
    }
    let s = state.normalize()?;
    let mut probs = [[0.0; 2]; 2];
    for (t, _) in s.terms() {
        if t.len() != 2 {
            return Err(Error::Shape("coincidence tables need two particles".into()));
        }
        let (ka, kb) = match (t[0].region.as_str(), t[1].region.as_str()) {
            (ALICE, BOB) => (&t[0], &t[1]),
            (BOB, ALICE) => (&t[1], &t[0]),
            _ => continue,
        };
        let (Some(a), Some(b)) = (ka.value(obs_a.dof()), kb.value(obs_b.dof())) else {
            return Err(Error::InvalidParam("measured DoF already traced".into()));
        };
        probs[a as usize][b as usize] += s.fock_amplitude(t).norm_sqr();
    }
    Ok(CoincidenceTable {
        obs_a,
        obs_b,
        rows: outcome_labels(&s, ALICE, obs_a),
        cols: outcome_labels(&s, BOB, obs_b),
        probs,
    })
}

/// Dichotomic values per outcome index, `a` for Alice and `b` for Bob.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signs {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Signs {
    /// L and U count +1, D and R count -1. Internal modes use the first
    /// label (up, H) as +1 on both sides.
    pub fn default_for(obs_a: Observable, obs_b: Observable) -> Self {
        let a = match obs_a {
            Observable::External => [1.0, -1.0],
            Observable::Internal => [1.0, -1.0],
        };
        let b = match obs_b {
            Observable::External => [-1.0, 1.0],
            Observable::Internal => [1.0, -1.0],
        };
        Signs { a, b }
    }
}

/// Normalized correlator of a table under a sign assignment.
pub fn expectation(table: &CoincidenceTable, signs: &Signs) -> Result<f64> {
    let total = table.total();
    if !(total > 1e-300) {
        return Err(Error::Degenerate("coincidence table is empty".into()));
    }
    let mut e = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            e += signs.a[i] * signs.b[j] * table.probs[i][j];
        }
    }
    Ok(e / total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub phi_a0: f64,
    pub phi_a1: f64,
    pub phi_b0: f64,
    pub phi_b1: f64,
}

impl ChshSettings {
    pub fn new(phi_a0: f64, phi_a1: f64, phi_b0: f64, phi_b1: f64) -> Result<Self> {
        if ![phi_a0, phi_a1, phi_b0, phi_b1].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParam("settings must be finite".into()));
        }
        Ok(ChshSettings { phi_a0, phi_a1, phi_b0, phi_b1 })
    }

    /// `(0, pi, pi/4, -pi/4)`
    pub fn literature() -> Self {
        use std::f64::consts::{FRAC_PI_4, PI};
        ChshSettings { phi_a0: 0.0, phi_a1: PI, phi_b0: FRAC_PI_4, phi_b1: -FRAC_PI_4 }
    }

    /// `(0, pi/2, pi/4, -pi/4)`, optimal for a `cos(phi_A - phi_B)` correlator.
    pub fn optimal() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        ChshSettings { phi_a0: 0.0, phi_a1: FRAC_PI_2, phi_b0: FRAC_PI_4, phi_b1: -FRAC_PI_4 }
    }
}

pub fn correlator<F>(build: F, phi_a: f64, phi_b: f64, obs: (Observable, Observable)) -> Result<f64>
where
    F: Fn(&PhaseConfig) -> SymState,
{
    let s = build(&PhaseConfig::from_settings(phi_a, phi_b));
    let t = coincidence_table(&s, obs.0, obs.1)?;
    expectation(&t, &Signs::default_for(obs.0, obs.1))
}

/// `|E(a0,b0) + E(a1,b0) + E(a0,b1) - E(a1,b1)|` from four circuit runs.
pub fn chsh_with<F>(build: F, st: &ChshSettings, obs: (Observable, Observable)) -> Result<f64>
where
    F: Fn(&PhaseConfig) -> SymState,
{
    let e = |a, b| correlator(&build, a, b, obs);
    Ok((e(st.phi_a0, st.phi_b0)? + e(st.phi_a1, st.phi_b0)? + e(st.phi_a0, st.phi_b1)? - e(st.phi_a1, st.phi_b1)?).abs())
}

pub fn chsh(kind: ParticleKind, st: &ChshSettings, obs: (Observable, Observable)) -> Result<f64> {
    chsh_with(|p| circuits::li_circuit(kind, p), st, obs)
}

pub const ALL_OBSERVABLE_PAIRS: [(Observable, Observable); 4] = [
    (Observable::External, Observable::External),
    (Observable::Internal, Observable::Internal),
    (Observable::Internal, Observable::External),
    (Observable::External, Observable::Internal),
];

/// The four tables of one circuit run, in the order of `ALL_OBSERVABLE_PAIRS`.
pub fn all_tables(state: &SymState) -> Result<Vec<CoincidenceTable>> {
    ALL_OBSERVABLE_PAIRS.iter().map(|&(a, b)| coincidence_table(state, a, b)).collect()
}

/// Kind-independent tables written in `delta = phi1 - phi2` with
/// `phi1 = phi_D - phi_L` and `phi2 = (phi_R - phi_U) - offset`, entries
/// `cos^2(delta/2)/4` or `sin^2(delta/2)/4`. The offset is `pi` for bosons
/// and 0 for fermions.
pub fn generalized_table(kind: ParticleKind, phi1: f64, phi_r_minus_u: f64) -> Result<Vec<CoincidenceTable>> {
    let offset = match kind {
        ParticleKind::Boson => std::f64::consts::PI,
        ParticleKind::Fermion => 0.0,
        ParticleKind::Distinguishable => {
            return Err(Error::InvalidParam("generalized tables cover identical particles only".into()))
        }
    };
    let half = (phi1 - (phi_r_minus_u - offset)) / 2.0;
    let (cc, ss) = (0.25 * half.cos().powi(2), 0.25 * half.sin().powi(2));
    let proto = circuits::li_circuit(kind, &PhaseConfig::zero());
    ALL_OBSERVABLE_PAIRS
        .iter()
        .map(|&(oa, ob)| {
            // value-ordered rows: path (L, D) / (R, U), spin (up, down)
            let probs = match (oa, ob) {
                (Observable::External, Observable::External) => [[ss, cc], [cc, ss]],
                (Observable::Internal, Observable::Internal) => [[ss, cc], [cc, ss]],
                (Observable::Internal, Observable::External) => [[cc, ss], [ss, cc]],
                (Observable::External, Observable::Internal) => [[cc, ss], [ss, cc]],
            };
            Ok(CoincidenceTable {
                obs_a: oa,
                obs_b: ob,
                rows: outcome_labels(&proto, ALICE, oa),
                cols: outcome_labels(&proto, BOB, ob),
                probs,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cis, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // First-quantized oracle: 8 single-particle modes (path L,D,R,U x spin),
    // 64-dim two-particle vector, explicit (anti)symmetrization.
    fn mode(path: usize, spin: usize) -> usize {
        path * 2 + spin
    }

    fn oracle_table(kind: ParticleKind, ph: &PhaseConfig, oa: usize, ob: usize) -> [[f64; 2]; 2] {
        let (l, d, r, u) = (0, 1, 2, 3);
        let (up, dn) = (0, 1);
        let i = c(0.0, 1.0);
        let mut p1 = vec![c(0.0, 0.0); 8];
        let mut p2 = vec![c(0.0, 0.0); 8];
        p1[mode(r, dn)] += 0.5 * cis(ph.phi_r);
        p1[mode(u, up)] += 0.5 * i * cis(ph.phi_r);
        p1[mode(d, up)] += 0.5 * i * cis(ph.phi_d);
        p1[mode(l, dn)] += -0.5 * cis(ph.phi_d);
        p2[mode(l, dn)] += 0.5 * cis(ph.phi_l);
        p2[mode(d, up)] += 0.5 * i * cis(ph.phi_l);
        p2[mode(u, up)] += 0.5 * i * cis(ph.phi_u);
        p2[mode(r, dn)] += -0.5 * cis(ph.phi_u);
        let eta = kind.eta().unwrap_or(0.0);
        let mut psi = vec![c(0.0, 0.0); 64];
        for a in 0..8 {
            for b in 0..8 {
                psi[a * 8 + b] = p1[a] * p2[b] + c(eta, 0.0) * p2[a] * p1[b];
            }
        }
        if kind == ParticleKind::Distinguishable {
            for a in 0..8 {
                for b in 0..8 {
                    psi[a * 8 + b] = p1[a] * p2[b];
                }
            }
        }
        let n: f64 = psi.iter().map(C64::norm_sqr).sum();
        let mut t = [[0.0; 2]; 2];
        // Alice's side holds paths L, D; Bob's R, U.
        for pa in [l, d] {
            for sa in 0..2 {
                for pb in [r, u] {
                    for sb in 0..2 {
                        let (ma, mb) = (mode(pa, sa), mode(pb, sb));
                        let p = (psi[ma * 8 + mb].norm_sqr() + psi[mb * 8 + ma].norm_sqr()) / n;
                        let va = if oa == 0 { sa } else { (pa != l) as usize };
                        let vb = if ob == 0 { sb } else { (pb != r) as usize };
                        t[va][vb] += p;
                    }
                }
            }
        }
        t
    }

    fn random_phases(rng: &mut ChaCha8Rng) -> PhaseConfig {
        let mut x = || rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        PhaseConfig::new(x(), x(), x(), x()).unwrap()
    }

    #[test]
    fn tables_match_first_quantized_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let ph = random_phases(&mut rng);
            for kind in [ParticleKind::Boson, ParticleKind::Fermion, ParticleKind::Distinguishable] {
                let s = circuits::li_circuit(kind, &ph);
                for &(oa, ob) in &ALL_OBSERVABLE_PAIRS {
                    let t = coincidence_table(&s, oa, ob).unwrap();
                    let o = oracle_table(kind, &ph, oa.dof(), ob.dof());
                    for i in 0..2 {
                        for j in 0..2 {
                            assert!((t.probs[i][j] - o[i][j]).abs() < 1e-12, "{kind} {oa:?} {ob:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fermion_tables_at_quarter_pi() {
        let ph = PhaseConfig::new(0.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0).unwrap();
        assert!((ph.phi() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let s = circuits::li_circuit(ParticleKind::Fermion, &ph);
        let t = coincidence_table(&s, Observable::External, Observable::External).unwrap();
        assert!(t.probs.iter().flatten().all(|p| (p - 0.125).abs() < 1e-12));
    }

    #[test]
    fn fermion_spin_spin_at_zero() {
        let s = circuits::li_circuit(ParticleKind::Fermion, &PhaseConfig::zero());
        let t = coincidence_table(&s, Observable::Internal, Observable::Internal).unwrap();
        assert!((t.get("up", "up").unwrap()).abs() < 1e-12);
        assert!((t.get("down", "down").unwrap()).abs() < 1e-12);
        assert!((t.get("up", "down").unwrap() - 0.25).abs() < 1e-12);
        assert!((t.get("D", "R").is_none()));
        let t = coincidence_table(&s, Observable::External, Observable::External).unwrap();
        assert!((t.get("D", "R").unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn distinguishable_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = circuits::li_circuit(ParticleKind::Distinguishable, &random_phases(&mut rng));
        for t in all_tables(&s).unwrap() {
            assert!(t.probs.iter().flatten().all(|p| (p - 0.125).abs() < 1e-12));
            let e = expectation(&t, &Signs::default_for(t.obs_a, t.obs_b)).unwrap();
            assert!(e.abs() < 1e-12);
        }
    }

    #[test]
    fn correlator_is_cosine_of_setting_difference() {
        for (a, b) in [(0.3, 0.3), (1.0, 1.0 - std::f64::consts::FRAC_PI_2), (0.2, -0.9)] {
            let e = correlator(|p| circuits::li_circuit(ParticleKind::Fermion, p), a, b, ALL_OBSERVABLE_PAIRS[0]).unwrap();
            assert!((e - f64::cos(a - b)).abs() < 1e-12);
        }
    }

    #[test]
    fn chsh_values() {
        let ext = ALL_OBSERVABLE_PAIRS[0];
        let opt = chsh(ParticleKind::Fermion, &ChshSettings::optimal(), ext).unwrap();
        assert!((opt - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let same = ChshSettings::new(0.4, 0.4, 0.4, 0.4).unwrap();
        assert!((chsh(ParticleKind::Boson, &same, ext).unwrap() - 2.0).abs() < 1e-12);
        assert!(chsh(ParticleKind::Distinguishable, &ChshSettings::literature(), ext).unwrap().abs() < 1e-12);
    }

    #[test]
    fn generalized_tables_match_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let ph = random_phases(&mut rng);
            for kind in [ParticleKind::Boson, ParticleKind::Fermion] {
                let t = all_tables(&circuits::li_circuit(kind, &ph)).unwrap();
                let g = generalized_table(kind, ph.phi_d - ph.phi_l, ph.phi_r - ph.phi_u).unwrap();
                for (a, b) in t.iter().zip(&g) {
                    assert_eq!(a.rows, b.rows);
                    for i in 0..2 {
                        for j in 0..2 {
                            assert!((a.probs[i][j] - b.probs[i][j]).abs() < 1e-12, "{kind} {:?}", a.obs_a);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn empty_table_is_an_error() {
        let t = CoincidenceTable {
            obs_a: Observable::External,
            obs_b: Observable::External,
            rows: ["L".into(), "D".into()],
            cols: ["R".into(), "U".into()],
            probs: [[0.0; 2]; 2],
        };
        assert!(expectation(&t, &Signs::default_for(t.obs_a, t.obs_b)).is_err());
    }
}

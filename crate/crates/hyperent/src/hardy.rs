//! Hardy's test for the two-qubit circuit state: ideal probabilities, the
//! maximum of `q`, a synthetic noisy device and the lower-bound estimator.
//!
//! Outcome `+1` is the computational `|0>`. A joint probability
//! `P(x, y | A_i, B_j)` is read off `(A_i x B_j)|psi>` in the Z basis.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::circuits::{self, gates};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};

/// `theta = phi = acos(2 - sqrt5)/2`, about 51.827 degrees.
pub fn qmax_angle() -> f64 {
    (2.0 - 5f64.sqrt()).acos() / 2.0
}

/// `(5 sqrt5 - 11) / 2`
pub fn qmax_closed_form() -> f64 {
    (5.0 * 5f64.sqrt() - 11.0) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyParams {
    pub theta: f64,
    pub phi: f64,
    /// `cot chi = tan theta cos phi`
    pub chi: f64,
}

impl HardyParams {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParam("angles must be finite".into()));
        }
        use std::f64::consts::{FRAC_PI_2, PI};
        let near = |x: f64| {
            let r = (x - FRAC_PI_2).rem_euclid(PI);
            r.min(PI - r) < 1e-12
        };
        if near(theta) && near(phi) {
            return Err(Error::Singular("chi has no limit at theta = phi = 90 degrees".into()));
        }
        let chi = theta.cos().atan2(theta.sin() * phi.cos());
        Ok(HardyParams { theta, phi, chi })
    }

    pub fn from_degrees(theta: f64, phi: f64) -> Result<Self> {
        HardyParams::new(theta.to_radians(), phi.to_radians())
    }

    /// Like [`HardyParams::from_degrees`] but moves the singular point to
    /// 89.99 degrees.
    pub fn from_degrees_nudged(theta: f64, phi: f64) -> Result<Self> {
        if (theta - 90.0).abs() < 1e-9 && (phi - 90.0).abs() < 1e-9 {
            return HardyParams::from_degrees(89.99, 89.99);
        }
        HardyParams::from_degrees(theta, phi)
    }

    pub fn state(&self) -> CVec {
        circuits::hardy_state(self.theta, self.phi).analytic
    }

    pub fn state_gate_built(&self) -> CVec {
        circuits::hardy_state(self.theta, self.phi).gate_built
    }

    /// `[A1, A2]`
    pub fn alice(&self) -> [CMat; 2] {
        let q = std::f64::consts::FRAC_PI_4;
        [gates::ub(q), gates::up(2.0 * self.phi) * gates::ub(q) * gates::up(-2.0 * self.phi)]
    }

    /// `[B1, B2]`
    pub fn bob(&self) -> [CMat; 2] {
        [gates::ub(0.0), gates::up(self.phi) * gates::ub(self.chi) * gates::up(-self.phi)]
    }
}

/// The four Hardy settings and outcomes, `(i, j, x, y)` with zero-based
/// setting indices and outcome bits (`0` is `+1`).
pub const HARDY_EVENTS: [(usize, usize, usize, usize); 4] = [(0, 0, 0, 0), (1, 0, 0, 1), (0, 1, 1, 0), (1, 1, 0, 0)];

/// Outcome distribution over `|xy>` for settings `(i, j)` on `rho`.
pub fn outcome_distribution(p: &HardyParams, rho: &CMat, i: usize, j: usize) -> [f64; 4] {
    let m = linalg::kron(&p.alice()[i], &p.bob()[j]);
    let r = &m * rho * m.adjoint();
    [r[(0, 0)].re, r[(1, 1)].re, r[(2, 2)].re, r[(3, 3)].re]
}

fn probs_of(p: &HardyParams, psi: &CVec) -> [f64; 4] {
    let rho = linalg::outer(psi);
    HARDY_EVENTS.map(|(i, j, x, y)| outcome_distribution(p, &rho, i, j)[2 * x + y])
}

/// `[P(++|A1,B1), P(+-|A2,B1), P(-+|A1,B2), P(++|A2,B2)]`
pub fn hardy_probs(p: &HardyParams) -> [f64; 4] {
    probs_of(p, &p.state())
}

pub fn hardy_probs_gate_built(p: &HardyParams) -> [f64; 4] {
    probs_of(p, &p.state_gate_built())
}

/// `|cos t cos chi (1 - e^{-2i phi}) / 2|^2`
pub fn hardy_q(p: &HardyParams) -> f64 {
    let z = c(1.0, 0.0) - linalg::cis(-2.0 * p.phi);
    (z * (0.5 * p.theta.cos() * p.chi.cos())).norm_sqr()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmaxResult {
    pub theta: f64,
    pub phi: f64,
    pub q_max: f64,
}

/// Grid search over `[0, 90]^2` degrees followed by golden-section
/// refinement along each axis.
pub fn qmax_solve() -> Result<QmaxResult> {
    let q = |t: f64, f: f64| HardyParams::new(t, f).map(|p| hardy_q(&p)).unwrap_or(0.0);
    let step = 0.5f64.to_radians();
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=180 {
        for j in 0..=180 {
            let (t, f) = (i as f64 * step, j as f64 * step);
            let v = q(t, f);
            if v > best.2 {
                best = (t, f, v);
            }
        }
    }
    let (mut t, mut f) = (best.0, best.1);
    for _ in 0..50 {
        t = golden_max(|x| q(x, f), t - step, t + step);
        f = golden_max(|x| q(t, x), f - step, f + step);
    }
    Ok(QmaxResult { theta: t, phi: f, q_max: q(t, f) })
}

fn golden_max<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while b - a > 1e-13 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1);
        }
    }
    (a + b) / 2.0
}

/// Asymmetric readout flips for one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    /// `0` read as `1`
    pub p01: f64,
    /// `1` read as `0`
    pub p10: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Two-qubit depolarizing strength after state preparation.
    pub depolarizing: f64,
    /// Readout flips for qubits A and B.
    pub readout: [Readout; 2],
    pub shots: u64,
}

impl NoiseModel {
    pub fn ideal(shots: u64) -> Self {
        let r = Readout { p01: 0.0, p10: 0.0 };
        NoiseModel { depolarizing: 0.0, readout: [r, r], shots }
    }

    /// Calibrated so the MES baseline `e4` sits near 0.08 and the sign of
    /// the estimated lower bound follows the reference device.
    pub fn calibrated() -> Self {
        NoiseModel {
            depolarizing: 0.02,
            readout: [Readout { p01: 0.01, p10: 0.135 }, Readout { p01: 0.01, p10: 0.02 }],
            shots: 8192,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ps = [self.depolarizing, self.readout[0].p01, self.readout[0].p10, self.readout[1].p01, self.readout[1].p10];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParam("noise probabilities must lie in [0, 1]".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidParam("shots must be positive".into()));
        }
        Ok(())
    }

    /// Outcome probabilities of the four Hardy events under this channel
    /// before shot noise.
    pub fn event_probs(&self, p: &HardyParams) -> [f64; 4] {
        let psi = p.state();
        let d = self.depolarizing;
        let rho = linalg::outer(&psi) * c(1.0 - d, 0.0) + CMat::identity(4, 4) * c(d / 4.0, 0.0);
        let conf = |r: &Readout| [[1.0 - r.p01, r.p10], [r.p01, 1.0 - r.p10]];
        let (ca, cb) = (conf(&self.readout[0]), conf(&self.readout[1]));
        HARDY_EVENTS.map(|(i, j, x, y)| {
            let dist = outcome_distribution(p, &rho, i, j);
            let mut v = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    v += ca[x][a] * cb[y][b] * dist[2 * a + b];
                }
            }
            v
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParam("empty sample set".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("non-finite sample".into()));
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(SampleSet { values, n, mean, sd })
    }
}

/// Shot-noise runs of the four Hardy events `[e1, e2, e3, e5]`.
pub fn noisy_sample(p: &HardyParams, noise: &NoiseModel, n_runs: usize, seed: u64) -> Result<[SampleSet; 4]> {
    noise.validate()?;
    if n_runs == 0 {
        return Err(Error::InvalidParam("n_runs must be positive".into()));
    }
    let probs = noise.event_probs(p);
    let mut out: Vec<SampleSet> = Vec::with_capacity(4);
    for (e, &pr) in probs.iter().enumerate() {
        let bin = Binomial::new(noise.shots, pr.clamp(0.0, 1.0))
            .map_err(|err| Error::InvalidParam(format!("binomial: {err}")))?;
        let values = (0..n_runs)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((r * 4 + e) as u64);
                bin.sample(&mut rng) as f64 / noise.shots as f64
            })
            .collect();
        out.push(SampleSet::new(values)?);
    }
    Ok(out.try_into().expect("four events"))
}

/// Two-sided Student-t quantile `t_{alpha/2}` with `n - 1` degrees of freedom.
pub fn t_quantile(alpha: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParam(format!("alpha = {alpha} outside (0, 1)")));
    }
    if n < 2 {
        return Err(Error::InvalidParam("need at least two samples".into()));
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(t.inverse_cdf(1.0 - alpha / 2.0))
}

/// `mean -+ t_{alpha/2} S / sqrt(n)`
pub fn t_ci(set: &SampleSet, alpha: f64) -> Result<(f64, f64)> {
    let h = t_quantile(alpha, set.n)? * set.sd / (set.n as f64).sqrt();
    Ok((set.mean - h, set.mean + h))
}

/// Lower confidence limit of `X - Y`.
pub fn diff_lower_bound(x: &SampleSet, y: &SampleSet, alpha: f64) -> Result<f64> {
    if x.n != y.n {
        return Err(Error::Shape(format!("sample sizes differ: {} vs {}", x.n, y.n)));
    }
    let t = t_quantile(alpha, x.n)?;
    Ok(x.mean - y.mean - t * (x.sd * x.sd + y.sd * y.sd).sqrt() / (x.n as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Nmes,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QlbEstimate {
    pub sigma4_bar: f64,
    pub s_sigma4: f64,
    pub eps5_bar: f64,
    pub s_eps5: f64,
    pub delta: f64,
    pub q_lb_hat: f64,
    pub decision: Decision,
}

/// Offline sets are `e4` runs of known MES and product states; the largest
/// mean sets the baseline.
pub fn estimate_qlb(offline: &[SampleSet], online: &SampleSet, alpha: f64) -> Result<QlbEstimate> {
    let base = offline
        .iter()
        .max_by(|a, b| a.mean.total_cmp(&b.mean))
        .ok_or_else(|| Error::InvalidParam("offline phase needs at least one set".into()))?;
    let q_lb_hat = diff_lower_bound(online, base, alpha)?;
    Ok(QlbEstimate {
        sigma4_bar: base.mean,
        s_sigma4: base.sd,
        eps5_bar: online.mean,
        s_eps5: online.sd,
        delta: online.mean - base.mean - q_lb_hat,
        q_lb_hat,
        decision: if q_lb_hat > 0.0 { Decision::Nmes } else { Decision::Inconclusive },
    })
}

/// `e5 - e1 - e2 - e3`; positive means local realism is violated.
pub fn chsh_hardy_lhs(e: &[f64; 4]) -> f64 {
    e[3] - e[0] - e[1] - e[2]
}

/// MES and product-state settings, in degrees, used for the offline phase.
pub const OFFLINE_SETTINGS: [(f64, f64); 5] = [(45.0, 90.0), (0.0, 0.0), (90.0, 0.0), (45.0, 0.0), (90.0, 45.0)];

/// Offline `e4` sets for [`OFFLINE_SETTINGS`]; seeds are `seed + k`.
pub fn offline_sets(noise: &NoiseModel, n_runs: usize, seed: u64) -> Result<Vec<SampleSet>> {
    OFFLINE_SETTINGS
        .iter()
        .enumerate()
        .map(|(k, &(t, f))| {
            let p = HardyParams::from_degrees(t, f)?;
            let [_, _, _, e4] = noisy_sample(&p, noise, n_runs, seed.wrapping_add(k as u64))?;
            Ok(e4)
        })
        .collect()
}

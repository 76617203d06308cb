//! One PASS/FAIL line per acceptance criterion. Criteria listed in
//! `KNOWN_FAILURES` are reported but do not fail the run; everything else
//! must pass.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hyperent::circuits::{self, PhaseConfig, ALICE, BOB};
use hyperent::fidelity::{self, ChannelKind, ChannelLayout, FidelityParams};
use hyperent::hardy::{self, HardyParams, NoiseModel};
use hyperent::linalg::{self, c, C64};
use hyperent::measurement::{self, ChshSettings, Observable, ALL_OBSERVABLE_PAIRS};
use hyperent::measures::{self, ThreeParticleCase, ZCoeffs};
use hyperent::protocols::{self, AttackConfig, SignalingConfig};
use hyperent::qstate::{DensityMatrix, DofSpec, Ket, ParticleKind, SymState};
use hyperent::trace::{self, Subsystem};

const KNOWN_FAILURES: [usize; 3] = [2, 5, 12];

struct Check {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Check {
    Check { ok, detail: detail.into() }
}

type Res = Result<Check, Box<dyn std::error::Error>>;

fn random_phases(rng: &mut ChaCha8Rng) -> PhaseConfig {
    let mut x = || rng.random_range(-PI..PI);
    PhaseConfig::new(x(), x(), x(), x()).unwrap()
}

fn c1_fermion_tables() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let ph = random_phases(&mut rng);
        let (co, si) = (ph.phi().cos().powi(2) / 4.0, ph.phi().sin().powi(2) / 4.0);
        let s = circuits::li_circuit(ParticleKind::Fermion, &ph);
        // (row, col, is_cos) for each table, labels as read off the circuit
        let expect: [(Observable, Observable, [(&str, &str, bool); 4]); 4] = [
            (Observable::External, Observable::External, [("D", "R", true), ("D", "U", false), ("L", "R", false), ("L", "U", true)]),
            (Observable::Internal, Observable::Internal, [("down", "down", false), ("down", "up", true), ("up", "down", true), ("up", "up", false)]),
            (Observable::Internal, Observable::External, [("down", "R", false), ("down", "U", true), ("up", "R", true), ("up", "U", false)]),
            (Observable::External, Observable::Internal, [("D", "down", true), ("D", "up", false), ("L", "down", false), ("L", "up", true)]),
        ];
        for (oa, ob, cells) in expect {
            let t = measurement::coincidence_table(&s, oa, ob)?;
            for (r, col, is_cos) in cells {
                let want = if is_cos { co } else { si };
                let got = t.get(r, col).ok_or("missing label")?;
                worst = worst.max((got - want).abs());
            }
        }
    }
    Ok(check(worst <= 1e-9, format!("max |dev| = {worst:.2e} over 100 configs")))
}

fn c2_chsh() -> Res {
    let ext = ALL_OBSERVABLE_PAIRS[0];
    let lit = ChshSettings::literature();
    let b = measurement::chsh(ParticleKind::Boson, &lit, ext)?;
    let f = measurement::chsh(ParticleKind::Fermion, &lit, ext)?;
    let d = measurement::chsh(ParticleKind::Distinguishable, &lit, ext)?;
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut dmax: f64 = 0.0;
    for _ in 0..100 {
        let mut x = || rng.random_range(-PI..PI);
        let st = ChshSettings::new(x(), x(), x(), x())?;
        dmax = dmax.max(measurement::chsh(ParticleKind::Distinguishable, &st, ext)?);
    }
    let t = 2.0 * SQRT_2;
    let opt = measurement::chsh(ParticleKind::Fermion, &ChshSettings::optimal(), ext)?;
    Ok(check(
        (b - t).abs() <= 1e-9 && (f - t).abs() <= 1e-9 && d.abs() <= 1e-9 && dmax <= 2.0,
        format!("boson {b:.9}, fermion {f:.9} (target {t:.9}); distinguishable {d:.1e}, max {dmax:.1e}; settings (0,pi/2,pi/4,-pi/4) give {opt:.9}"),
    ))
}

fn c3_generalized() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let ph = random_phases(&mut rng);
        for kind in [ParticleKind::Boson, ParticleKind::Fermion] {
            let t = measurement::all_tables(&circuits::li_circuit(kind, &ph))?;
            let g = measurement::generalized_table(kind, ph.phi_d - ph.phi_l, ph.phi_r - ph.phi_u)?;
            for (a, b) in t.iter().zip(&g) {
                for (x, y) in a.probs.iter().flatten().zip(b.probs.iter().flatten()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    Ok(check(worst <= 1e-9, format!("max |dev| = {worst:.2e} over 100 draws x 2 kinds")))
}

fn c4_hhes_monogamy() -> Res {
    let ph = PhaseConfig::new(0.2, 0.9, -0.3, 0.5)?;
    let rho = trace::project_one_per_region(&circuits::li_circuit(ParticleKind::Boson, &ph).to_density()?, &[ALICE, BOB])?;
    let mut out = Vec::new();
    let mut ok = true;
    for (name, j) in [("spin-spin", 0), ("spin-path", 1)] {
        let r = trace::reduce_to_qubits(&rho, &[(ALICE.into(), 0), (BOB.into(), j)])?;
        let cc = measures::concurrence(&r)?;
        let ln = measures::log_negativity(&r, 2, 2)?;
        ok &= (cc - 1.0).abs() <= 1e-9 && (ln - 1.0).abs() <= 1e-9;
        out.push(format!("{name}: C = {cc:.12}, LN = {ln:.12}"));
    }
    Ok(check(ok, out.join("; ")))
}

fn c5_three_particle() -> Res {
    let mut worst = (0.0f64, 0usize);
    let mut zdev: f64 = 0.0;
    let mut zcount = 0;
    let mut pattern_misses = 0;
    for id in 1..=13 {
        for kind in [ParticleKind::Boson, ParticleKind::Fermion] {
            let mut rng = ChaCha8Rng::seed_from_u64(105);
            rng.set_stream(id as u64);
            for _ in 0..50 {
                let case = ThreeParticleCase::random(id, kind, &mut rng)?;
                let out = measures::three_particle_case(&case)?;
                if out.report.residual.abs() > worst.0 {
                    worst = (out.report.residual.abs(), id);
                }
                pattern_misses += usize::from(!out.matches_table);
                let v = case.qubits()?;
                let w: f64 = [v[0b001], v[0b010], v[0b100]].iter().map(C64::norm_sqr).sum();
                if (w - 1.0).abs() <= 1e-12 {
                    let z = ZCoeffs::from_qubits(&v)?;
                    zcount += 1;
                    zdev = zdev.max((z.c2_1_23() - out.report.c2_a_bc).abs());
                }
            }
        }
    }
    Ok(check(
        worst.0 <= 1e-9 && zdev <= 1e-9 && pattern_misses == 0,
        format!(
            "max |C12+C13-C1|23| = {:.3e} (case {}), z-form dev {zdev:.1e} on {zcount} single-flip states, {pattern_misses} pattern misses",
            worst.0, worst.1
        ),
    ))
}

fn c6_ckw() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut min_pure = f64::INFINITY;
    for _ in 0..200 {
        let r = measures::monogamy_report_pure(&linalg::random_state(8, &mut rng))?;
        min_pure = min_pure.min(r.residual);
    }
    let mut min_mixed = f64::INFINITY;
    for _ in 0..50 {
        let w = rng.random_range(0.05..0.95);
        let ens = [(w, linalg::random_state(8, &mut rng)), (1.0 - w, linalg::random_state(8, &mut rng))];
        min_mixed = min_mixed.min(measures::mixed_monogamy_check(&ens)?.residual);
    }
    Ok(check(
        min_pure >= -1e-9 && min_mixed >= -1e-9,
        format!("min residual pure {min_pure:.3e}, mixed {min_mixed:.3e}"),
    ))
}

fn c7_fidelity_relation() -> Res {
    let mut worst: f64 = 0.0;
    for kind in [ChannelKind::Distinguishable, ChannelKind::Indistinguishable] {
        for n in 1..=3 {
            let layout = ChannelLayout::new(kind, n)?;
            let params = FidelityParams::defaults(&layout);
            for k in 0..=20 {
                let r = fidelity::relation_check(k as f64 / 20.0, &layout, &params)?;
                worst = worst.max(r.residual.abs());
            }
        }
    }
    // single DoF, labeled: f = (2F + 1) / 3
    let layout = ChannelLayout::new(ChannelKind::Distinguishable, 1)?;
    let mut n1: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..10 {
        let rho = layout.density(linalg::random_density(4, 2, &mut rng))?;
        let pair = layout.pair(&rho, 0, 0)?;
        let f = fidelity::average_teleport_fidelity(&pair)?;
        let big_f = fidelity::singlet_fraction(&pair, 2)?;
        if big_f >= 0.5 {
            n1 = n1.max((f - (2.0 * big_f + 1.0) / 3.0).abs());
        }
    }
    Ok(check(worst <= 1e-6 && n1 <= 1e-9, format!("max residual {worst:.2e}; n=1 dev {n1:.2e}")))
}

fn c8_singlet_facts() -> Res {
    let layout = ChannelLayout::new(ChannelKind::Distinguishable, 2)?;
    let dis = fidelity::dishhes_state(0.7, 0.3)?;
    let pairs = fidelity::pairwise_singlet_fractions(&dis, &layout)?;
    let pair_dev = pairs.iter().flatten().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    let dis_g = fidelity::generalized_singlet_fraction(&dis, &layout)?;
    let hh_layout = ChannelLayout::new(ChannelKind::Indistinguishable, 2)?;
    let hh = fidelity::generalized_singlet_fraction(&fidelity::hhes_channel(&PhaseConfig::new(0.3, 1.2, -0.4, 0.9)?)?, &hh_layout)?;
    let b2 = fidelity::sf_upper_bound_check(&layout, 200, 108)?;
    let b3 = fidelity::sf_upper_bound_check(&ChannelLayout::new(ChannelKind::Distinguishable, 3)?, 200, 108)?;
    Ok(check(
        pair_dev <= 1e-4 && (dis_g - 1.0).abs() <= 1e-4 && (hh - 2.0).abs() <= 1e-4 && b2.violations == 0 && b3.violations == 0,
        format!(
            "DIsHHES pairs dev {pair_dev:.1e}, F_g {dis_g:.6}; HHES F_g {hh:.6}; bound n=2 max {:.4}/{}, n=3 max {:.4}/{}",
            b2.max_observed, b2.bound, b3.max_observed, b3.bound
        ),
    ))
}

fn c9_signaling() -> Res {
    let mut exact_ok = true;
    for n in 2..=10 {
        exact_ok &= protocols::signaling_exact(n)? == 1.0 - 0.5f64.powi(n as i32);
    }
    let mut worst_sigma: f64 = 0.0;
    for n in 2..=4 {
        for seed in 1..=5 {
            let e = protocols::signaling_mc(&SignalingConfig::new(n, 100_000, seed)?);
            worst_sigma = worst_sigma.max((e.estimate - protocols::signaling_formula(n)).abs() / e.stderr);
        }
    }
    let mut worst_copy: f64 = 0.0;
    for m in 2..=4 {
        for seed in 1..=5 {
            let e = protocols::signaling_multicopy_mc(m, 100_000, seed)?;
            worst_copy = worst_copy.max((e.estimate - protocols::signaling_multicopy(m)?).abs() / e.stderr);
        }
    }
    Ok(check(
        exact_ok && worst_sigma <= 4.0 && worst_copy <= 4.0,
        format!("exact N=2..10 {}; MC worst {worst_sigma:.2} sigma, multi-copy worst {worst_copy:.2} sigma", if exact_ok { "exact" } else { "mismatch" }),
    ))
}

fn c10_hardy_core() -> Res {
    let r = hardy::qmax_solve()?;
    let closed = (5.0 * 5f64.sqrt() - 11.0) / 2.0;
    let angles_ok = (r.theta.to_degrees() - 51.827).abs() <= 1e-3 && (r.phi.to_degrees() - 51.827).abs() <= 1e-3;
    let zero = hardy::OFFLINE_SETTINGS
        .iter()
        .map(|&(t, f)| HardyParams::from_degrees(t, f).map(|p| hardy::hardy_q(&p)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let q45 = hardy::hardy_q(&HardyParams::from_degrees(45.0, 45.0)?);
    let mut gate: f64 = 0.0;
    for (t, f) in [(51.827, 51.827), (30.0, 60.0), (45.0, 45.0), (10.0, 70.0)] {
        let p = HardyParams::from_degrees(t, f)?;
        let (a, b) = (hardy::hardy_probs(&p), hardy::hardy_probs_gate_built(&p));
        gate = gate.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    Ok(check(
        (r.q_max - closed).abs() <= 1e-9 && angles_ok && zero <= 1e-12 && (q45 - 0.0833).abs() <= 5e-4 && gate <= 1e-9,
        format!(
            "q_max {:.10} at ({:.4}, {:.4}) deg; MES/PS max q {zero:.1e}; q(45,45) {q45:.5}; gate dev {gate:.1e}",
            r.q_max,
            r.theta.to_degrees(),
            r.phi.to_degrees()
        ),
    ))
}

fn c11_hardy_estimator() -> Res {
    let noise = NoiseModel::calibrated();
    let offline = hardy::offline_sets(&noise, 10, 1001)?;
    let mut out = Vec::new();
    let mut ok = true;
    for (t, f, want_positive) in [(51.827, 51.827, true), (55.0, 55.0, true), (30.0, 60.0, false)] {
        let [_, _, _, e5] = hardy::noisy_sample(&HardyParams::from_degrees(t, f)?, &noise, 10, 1)?;
        let est = hardy::estimate_qlb(&offline, &e5, 0.01)?;
        ok &= (est.q_lb_hat > 0.0) == want_positive;
        out.push(format!("({t},{f}) q_lb {:+.4}", est.q_lb_hat));
    }
    Ok(check(ok, out.join(", ")))
}

fn c12_attack() -> Res {
    let t = hardy::qmax_angle();
    let reports = (0..=10)
        .map(|k| protocols::hardy_attack(&AttackConfig::new(t, t, k as f64 / 10.0)?))
        .collect::<Result<Vec<_>, _>>()?;
    let decreasing = reports.windows(2).all(|w| w[1].q_alpha < w[0].q_alpha);
    let ends = reports[10].q_alpha == reports[10].q && reports[0].q_alpha == reports[0].q_prime;
    let grid: Vec<String> = reports.iter().map(|r| format!("{:.4}", r.q_alpha)).collect();
    Ok(check(decreasing && ends, format!("q_alpha = [{}]; endpoints exact: {ends}", grid.join(" "))))
}

/// Largest entry difference after embedding both operators in the union of
/// their bases.
fn same_operator(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let mut basis = a.basis.clone();
    for t in &b.basis {
        if !basis.contains(t) {
            basis.push(t.clone());
        }
    }
    let entry = |m: &DensityMatrix, x: &[Ket], y: &[Ket]| match (m.index_of(x), m.index_of(y)) {
        (Some(i), Some(j)) => m.data[(i, j)],
        _ => c(0.0, 0.0),
    };
    let mut worst: f64 = 0.0;
    for x in &basis {
        for y in &basis {
            worst = worst.max((entry(a, x, y) - entry(b, x, y)).norm());
        }
    }
    worst
}

fn random_two_region_state(kind: ParticleKind, n_dofs: usize, rng: &mut ChaCha8Rng) -> hyperent::Result<SymState> {
    let dofs: Vec<DofSpec> = (0..n_dofs).map(|j| DofSpec::qubit(&format!("q{j}"))).collect();
    let mut s = SymState::new(kind, dofs);
    let bits = |x: usize| -> Vec<u8> { (0..n_dofs).map(|j| ((x >> (n_dofs - 1 - j)) & 1) as u8).collect() };
    for a in 0..(1 << n_dofs) {
        for b in 0..(1 << n_dofs) {
            let amp = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            s.add(vec![Ket::new("s1", &bits(a)), Ket::new("s2", &bits(b))], amp)?;
        }
    }
    s.normalize()
}

fn c13_trace_rule() -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let mut order: f64 = 0.0;
    for k in 0..50 {
        let kind = if k % 2 == 0 { ParticleKind::Boson } else { ParticleKind::Fermion };
        let rho = random_two_region_state(kind, 3, &mut rng)?.to_density()?;
        let seq = |subs: &[Subsystem]| -> hyperent::Result<DensityMatrix> {
            subs.iter().try_fold(rho.clone(), |r, s| trace::trace_dof_indist(&r, s))
        };
        let (x, y, z) = (Subsystem::dof("s1", 0), Subsystem::dof("s2", 2), Subsystem::dof("s1", 1));
        order = order.max(same_operator(&seq(&[x.clone(), y.clone(), z.clone()])?, &seq(&[z.clone(), y.clone(), x.clone()])?));
        order = order.max(same_operator(&seq(&[x.clone(), y.clone()])?, &seq(&[y, x])?));
    }
    // n = 1: DoF trace equals the Lo Franco localized particle trace
    let mut lofranco: f64 = 0.0;
    for k in 0..20 {
        let kind = if k % 2 == 0 { ParticleKind::Boson } else { ParticleKind::Fermion };
        let s = random_two_region_state(kind, 1, &mut rng)?;
        let a = trace::trace_dof_indist(&s.to_density()?, &Subsystem::dof("s1", 0))?;
        let b = trace::particle_trace_lofranco(&s, Some("s1"))?;
        lofranco = lofranco.max(same_operator(&a, &b));
    }
    // witness on the unprojected HHES state
    let hh = circuits::li_circuit(ParticleKind::Boson, &PhaseConfig::new(0.2, 0.9, -0.3, 0.5)?).to_density()?;
    let dofwise = trace::trace_dof_indist(&trace::trace_dof_indist(&hh, &Subsystem::dof(ALICE, 0))?, &Subsystem::dof(ALICE, 1))?;
    let region = trace::trace_region(&hh, ALICE)?;
    let gap = same_operator(&dofwise, &region);
    Ok(check(
        order <= 1e-9 && lofranco <= 1e-9 && gap > 1e-6,
        format!("order dev {order:.1e}; n=1 vs Lo Franco {lofranco:.1e}; HHES DoF-wise vs region gap {gap:.3e}"),
    ))
}

type Criterion = (usize, &'static str, Duration, fn() -> Res);

fn main() {
    let suite: [Criterion; 13] = [
        (1, "fermionic detection tables", Duration::from_secs(1), c1_fermion_tables),
        (2, "CHSH at the quoted settings", Duration::from_secs(1), c2_chsh),
        (3, "generalized tables", Duration::from_secs(1), c3_generalized),
        (4, "HHES monogamy violation", Duration::from_secs(1), c4_hhes_monogamy),
        (5, "three-particle equality", Duration::from_secs(10), c5_three_particle),
        (6, "distinguishable CKW", Duration::from_secs(10), c6_ckw),
        (7, "fidelity relation", Duration::from_secs(30), c7_fidelity_relation),
        (8, "singlet-fraction facts", Duration::from_secs(60), c8_singlet_facts),
        (9, "signaling", Duration::from_secs(10), c9_signaling),
        (10, "Hardy core", Duration::from_secs(5), c10_hardy_core),
        (11, "Hardy estimator", Duration::from_secs(30), c11_hardy_estimator),
        (12, "Hardy attack", Duration::from_secs(1), c12_attack),
        (13, "trace-rule properties", Duration::from_secs(10), c13_trace_rule),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, f) in suite {
        let t0 = Instant::now();
        let res = f();
        let dt = t0.elapsed();
        let (ok, detail) = match res {
            Ok(c) => (c.ok && dt <= budget, c.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if ok { "PASS" } else { "FAIL" };
        let note = if !ok && KNOWN_FAILURES.contains(&id) { " [known]" } else { "" };
        println!("{tag}{note} {id:>2} {name} ({:.2}s / {}s): {detail}", dt.as_secs_f64(), budget.as_secs());
        if !ok && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

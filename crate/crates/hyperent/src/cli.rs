//! Command-line front end. Every subcommand prints one JSON record
//! `{schema_version, config, results, provenance}`; tabular results can also
//! be written as CSV. Angles are degrees on the command line.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::circuits::{self, PhaseConfig};
use crate::error::{Error, Result};
use crate::fidelity::{self, ChannelKind, ChannelLayout, FidelityParams};
use crate::hardy::{self, HardyParams, NoiseModel, Readout};
use crate::measurement::{self, ChshSettings, Observable};
use crate::measures::{self, ThreeParticleCase};
use crate::protocols::{self, Ancilla, AttackConfig, SignalingConfig};
use crate::qstate::{DensityMatrix, ParticleKind};
use crate::trace::{self, Subsystem};

pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "hyperent", version, about = "Multi-DoF entanglement experiments")]
pub struct Cli {
    /// Plain-text key=value file with subcommand flags; flags on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the record to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write the CSV rows to this file.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Cmd {
    /// Coincidence tables of the two-particle circuit.
    Tables(CircuitArgs),
    /// CHSH value of the circuit correlator.
    Chsh(ChshArgs),
    /// Trace subsystems out of the circuit state.
    Trace(TraceArgs),
    /// Monogamy report on three DoF subsystems of the circuit state.
    Monogamy(MonogamyArgs),
    /// Three-particle case table survey.
    Cases(CasesArgs),
    /// Teleportation fidelity against singlet fraction over the two-parameter family.
    FidelityRelation(RelationArgs),
    /// Generalized singlet fraction on random labeled channels against its bound.
    SfBound(SfBoundArgs),
    /// Cloning-based signaling probability.
    Signaling(SignalingArgs),
    /// Generalized singlet fraction of the pseudo-telepathy state.
    Qpq(QpqArgs),
    /// Two-particle swap circuit table and CHSH.
    Swap(PhaseArgs),
    /// Hardy probability under particle exchange.
    Attack(AttackArgs),
    /// Hardy's test.
    Hardy {
        #[command(subcommand)]
        #[serde(flatten)]
        cmd: HardyCmd,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct PhaseArgs {
    /// Phases in degrees, order L,D,R,U.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 0.0, 0.0, 0.0])]
    pub phases: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct CircuitArgs {
    #[arg(long, default_value = "fermion")]
    pub kind: ParticleKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub phases: PhaseArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct ChshArgs {
    #[arg(long, default_value = "fermion")]
    pub kind: ParticleKind,
    /// Settings in degrees, order a0,a1,b0,b1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 180.0, 45.0, -45.0])]
    pub settings: Vec<f64>,
    #[arg(long, default_value = "external")]
    pub obs_a: Observable,
    #[arg(long, default_value = "external")]
    pub obs_b: Observable,
}

#[derive(Args, Debug, Serialize)]
pub struct TraceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub circuit: CircuitArgs,
    /// Subsystems traced in order, `region` or `region:dof`.
    #[arg(long = "trace", value_delimiter = ',')]
    pub trace: Vec<Subsystem>,
    /// Keep the bunched terms instead of projecting onto one particle per region.
    #[arg(long)]
    pub no_project: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct MonogamyArgs {
    #[arg(long, default_value = "boson")]
    pub kind: ParticleKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub phases: PhaseArgs,
    #[arg(long, default_value = "s1:0")]
    pub a: Subsystem,
    #[arg(long, default_value = "s2:0")]
    pub b: Subsystem,
    #[arg(long, default_value = "s2:1")]
    pub c: Subsystem,
}

#[derive(Args, Debug, Serialize)]
pub struct CasesArgs {
    #[arg(long, default_value = "boson")]
    pub kind: ParticleKind,
    #[arg(long, default_value_t = 50)]
    pub draws: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Case ids to run; all thirteen by default.
    #[arg(long, value_delimiter = ',')]
    pub case: Vec<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct RelationArgs {
    #[arg(long, default_value = "distinguishable")]
    pub kind: ChannelKind,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    /// Override the identical-particle fidelity ceiling.
    #[arg(long)]
    pub f_max: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct SfBoundArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SignalingArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Use M two-DoF copies instead of one N-DoF register.
    #[arg(long)]
    pub copies: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct QpqArgs {
    #[arg(long, default_value_t = 45.0)]
    pub theta: f64,
    #[arg(long, default_value = "particle")]
    pub ancilla: Ancilla,
}

#[derive(Args, Debug, Serialize)]
pub struct AttackArgs {
    #[arg(long, default_value_t = 51.827)]
    pub theta: f64,
    #[arg(long, default_value_t = 51.827)]
    pub phi: f64,
    /// Single routing probability; an 11-point grid when absent.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct AngleArgs {
    #[arg(long, default_value_t = 51.827)]
    pub theta: f64,
    #[arg(long, default_value_t = 51.827)]
    pub phi: f64,
    /// Replace theta = phi = 90 by 89.99.
    #[arg(long)]
    pub nudge_singular: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = NoiseModel::calibrated().depolarizing)]
    pub depolarizing: f64,
    /// Qubit A readout flips `p01,p10`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.135])]
    pub readout_a: Vec<f64>,
    /// Qubit B readout flips `p01,p10`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.02])]
    pub readout_b: Vec<f64>,
    #[arg(long, default_value_t = 8192)]
    pub shots: u64,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "hardy", rename_all = "kebab-case")]
pub enum HardyCmd {
    /// Ideal Hardy probabilities.
    Probs(AngleArgs),
    /// Maximum of q by grid search and refinement.
    Qmax,
    /// Synthetic noisy runs of the four Hardy events.
    Sample {
        #[command(flatten)]
        #[serde(flatten)]
        angles: AngleArgs,
        #[command(flatten)]
        #[serde(flatten)]
        noise: NoiseArgs,
        /// Significance level of the per-event intervals in the CSV.
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Lower-bound estimate of q with an offline MES/product baseline.
    Estimate {
        #[command(flatten)]
        #[serde(flatten)]
        angles: AngleArgs,
        #[command(flatten)]
        #[serde(flatten)]
        noise: NoiseArgs,
        /// Significance level of the two-sided interval.
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
}

struct Outcome {
    results: Value,
    csv: Option<String>,
    refs: Vec<&'static str>,
}

fn phase_config(deg: &[f64]) -> Result<PhaseConfig> {
    let arr: [f64; 4] = deg
        .try_into()
        .map_err(|_| Error::InvalidParam(format!("expected 4 phases, got {}", deg.len())))?;
    PhaseConfig::from_degrees(arr)
}

fn circuit_state(kind: ParticleKind, deg: &[f64]) -> Result<crate::qstate::SymState> {
    Ok(circuits::li_circuit(kind, &phase_config(deg)?))
}

fn projected_density(kind: ParticleKind, deg: &[f64]) -> Result<DensityMatrix> {
    let rho = circuit_state(kind, deg)?.to_density()?;
    trace::project_one_per_region(&rho, &[circuits::ALICE, circuits::BOB])
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidParam(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParam(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("utf8 csv"))
}

fn noise_model(n: &NoiseArgs) -> Result<NoiseModel> {
    let pair = |v: &[f64], name: &str| -> Result<Readout> {
        match v {
            [p01, p10] => Ok(Readout { p01: *p01, p10: *p10 }),
            _ => Err(Error::InvalidParam(format!("--{name} takes two values"))),
        }
    };
    let m = NoiseModel {
        depolarizing: n.depolarizing,
        readout: [pair(&n.readout_a, "readout-a")?, pair(&n.readout_b, "readout-b")?],
        shots: n.shots,
    };
    m.validate()?;
    Ok(m)
}

fn hardy_params(a: &AngleArgs) -> Result<HardyParams> {
    if a.nudge_singular {
        HardyParams::from_degrees_nudged(a.theta, a.phi)
    } else {
        HardyParams::from_degrees(a.theta, a.phi)
    }
}

#[derive(Serialize)]
struct TableRow<'a> {
    obs_a: Observable,
    obs_b: Observable,
    row: &'a str,
    col: &'a str,
    prob: f64,
}

fn run_tables(a: &CircuitArgs) -> Result<Outcome> {
    let ph = phase_config(&a.phases.phases)?;
    let tables = measurement::all_tables(&circuits::li_circuit(a.kind, &ph))?;
    let mut rows = Vec::new();
    for t in &tables {
        for i in 0..2 {
            for j in 0..2 {
                rows.push(TableRow { obs_a: t.obs_a, obs_b: t.obs_b, row: &t.rows[i], col: &t.cols[j], prob: t.probs[i][j] });
            }
        }
    }
    Ok(Outcome {
        results: json!({ "phi_deg": ph.phi().to_degrees(), "phases_deg": a.phases.phases, "tables": tables }),
        csv: Some(csv_rows(&rows)?),
        refs: vec!["circuits::li_circuit", "measurement::coincidence_table"],
    })
}

fn run_chsh(a: &ChshArgs) -> Result<Outcome> {
    let s: [f64; 4] = a
        .settings
        .as_slice()
        .try_into()
        .map_err(|_| Error::InvalidParam("expected 4 settings".into()))?;
    let st = ChshSettings::new(s[0].to_radians(), s[1].to_radians(), s[2].to_radians(), s[3].to_radians())?;
    let value = measurement::chsh(a.kind, &st, (a.obs_a, a.obs_b))?;
    let verdict = if value > 2.0 + 1e-9 { "violation" } else { "no violation" };
    Ok(Outcome {
        results: json!({ "value": value, "verdict": verdict, "tsirelson": 2.0 * 2f64.sqrt() }),
        csv: Some(format!("value,verdict\n{value},{verdict}\n")),
        refs: vec!["measurement::chsh"],
    })
}

fn run_trace(a: &TraceArgs) -> Result<Outcome> {
    let mut rho = circuit_state(a.circuit.kind, &a.circuit.phases.phases)?.to_density()?;
    if !a.no_project {
        rho = trace::project_one_per_region(&rho, &[circuits::ALICE, circuits::BOB])?;
    }
    for sub in &a.trace {
        rho = match (sub.dof_index, rho.kind) {
            (None, _) => trace::trace_region(&rho, &sub.region)?,
            (Some(j), ParticleKind::Distinguishable) => {
                let slot = trace::slot_of_region(&rho, &sub.region)?;
                trace::trace_dof_dist(&rho, slot, j)?
            }
            (Some(_), _) => trace::trace_dof_indist(&rho, sub)?,
        };
    }
    Ok(Outcome {
        results: json!({
            "traced": a.trace.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "purity": rho.purity(),
            "eigenvalues": rho.eigenvalues(),
            "density": rho.to_json(),
        }),
        csv: Some(rho.to_csv()),
        refs: vec!["trace::project_one_per_region", "trace::trace_dof_indist", "trace::trace_region"],
    })
}

fn run_monogamy(a: &MonogamyArgs) -> Result<Outcome> {
    let rho = projected_density(a.kind, &a.phases.phases)?;
    let report = measures::monogamy_report(&rho, &a.a, &a.b, &a.c)?;
    let keep = |s: &Subsystem| -> Result<(String, usize)> {
        s.dof_index
            .map(|j| (s.region.clone(), j))
            .ok_or_else(|| Error::InvalidParam(format!("`{s}` is not a DoF")))
    };
    let ab = trace::reduce_to_qubits(&rho, &[keep(&a.a)?, keep(&a.b)?])?;
    let ac = trace::reduce_to_qubits(&rho, &[keep(&a.a)?, keep(&a.c)?])?;
    Ok(Outcome {
        results: json!({
            "report": report,
            "log_negativity_ab": measures::log_negativity(&ab, 2, 2)?,
            "log_negativity_ac": measures::log_negativity(&ac, 2, 2)?,
        }),
        csv: Some(format!(
            "c2_ab,c2_ac,c2_a_bc,residual\n{},{},{},{}\n",
            report.c2_ab, report.c2_ac, report.c2_a_bc, report.residual
        )),
        refs: vec!["trace::reduce_to_qubits", "measures::concurrence", "measures::monogamy_report"],
    })
}

#[derive(Serialize)]
struct CaseRow {
    case_id: usize,
    draws: usize,
    pattern_matches: usize,
    max_abs_residual: f64,
    mean_c2_ab: f64,
    mean_c2_ac: f64,
    mean_c2_a_bc: f64,
}

fn run_cases(a: &CasesArgs) -> Result<Outcome> {
    if a.kind == ParticleKind::Distinguishable {
        return Err(Error::InvalidParam("the case table is for identical particles".into()));
    }
    let ids: Vec<usize> = if a.case.is_empty() { (1..=13).collect() } else { a.case.clone() };
    let mut rows = Vec::new();
    for &id in &ids {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        rng.set_stream(id as u64);
        let mut row = CaseRow {
            case_id: id,
            draws: a.draws,
            pattern_matches: 0,
            max_abs_residual: 0.0,
            mean_c2_ab: 0.0,
            mean_c2_ac: 0.0,
            mean_c2_a_bc: 0.0,
        };
        for _ in 0..a.draws {
            let out = measures::three_particle_case(&ThreeParticleCase::random(id, a.kind, &mut rng)?)?;
            row.pattern_matches += usize::from(out.matches_table);
            row.max_abs_residual = row.max_abs_residual.max(out.report.residual.abs());
            row.mean_c2_ab += out.report.c2_ab / a.draws as f64;
            row.mean_c2_ac += out.report.c2_ac / a.draws as f64;
            row.mean_c2_a_bc += out.report.c2_a_bc / a.draws as f64;
        }
        rows.push(row);
    }
    Ok(Outcome {
        results: json!({ "cases": rows }),
        csv: Some(csv_rows(&rows)?),
        refs: vec!["measures::three_particle_case", "measures::monogamy_report_pure"],
    })
}

fn run_relation(a: &RelationArgs) -> Result<Outcome> {
    if a.points < 2 {
        return Err(Error::InvalidParam("need at least two grid points".into()));
    }
    let layout = ChannelLayout::new(a.kind, a.n)?;
    let params = match a.f_max {
        Some(f) => FidelityParams::with_f_max(&layout, f)?,
        None => FidelityParams::defaults(&layout),
    };
    let rows = (0..a.points)
        .map(|k| fidelity::relation_check(k as f64 / (a.points - 1) as f64, &layout, &params))
        .collect::<Result<Vec<_>>>()?;
    let max_residual = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    Ok(Outcome {
        results: json!({ "params": params, "rows": rows, "max_abs_residual": max_residual }),
        csv: Some(csv_rows(&rows)?),
        refs: vec!["fidelity::relation_check", "fidelity::two_param_state"],
    })
}

fn run_sf_bound(a: &SfBoundArgs) -> Result<Outcome> {
    let layout = ChannelLayout::new(ChannelKind::Distinguishable, a.n)?;
    let report = fidelity::sf_upper_bound_check(&layout, a.samples, a.seed)?;
    Ok(Outcome {
        csv: Some(csv_rows(std::slice::from_ref(&report))?),
        results: to_value(&report),
        refs: vec!["fidelity::sf_upper_bound_check"],
    })
}

fn run_signaling(a: &SignalingArgs) -> Result<Outcome> {
    let results = match a.copies {
        Some(m) => json!({
            "copies": m,
            "exact": protocols::signaling_multicopy(m)?,
            "averaged_over_bases": protocols::signaling_multicopy_averaged(m)?,
            "mc": protocols::signaling_multicopy_mc(m, a.trials, a.seed)?,
        }),
        None => {
            let cfg = SignalingConfig::new(a.n, a.trials, a.seed)?;
            json!({
                "exact": protocols::signaling_exact(a.n)?,
                "formula": protocols::signaling_formula(a.n),
                "mc": protocols::signaling_mc(&cfg),
            })
        }
    };
    Ok(Outcome { results, csv: None, refs: vec!["protocols::signaling_exact", "circuits::sorter_cascade"] })
}

fn run_qpq(a: &QpqArgs) -> Result<Outcome> {
    let t = a.theta.to_radians();
    let layout = ChannelLayout::new(ChannelKind::Distinguishable, 2)?;
    let pairs = fidelity::pairwise_singlet_fractions(&protocols::qpq_state(t, a.ancilla)?, &layout)?;
    let computed = protocols::qpq_sf(t, a.ancilla)?;
    let formula = protocols::qpq_formula(t, a.ancilla);
    Ok(Outcome {
        results: json!({ "computed": computed, "published_formula": formula, "pairwise": pairs }),
        csv: Some(format!("theta_deg,computed,published_formula\n{},{computed},{formula}\n", a.theta)),
        refs: vec!["protocols::qpq_sf", "fidelity::generalized_singlet_fraction"],
    })
}

fn run_swap(a: &PhaseArgs) -> Result<Outcome> {
    let r = protocols::swap_verify(&phase_config(&a.phases)?)?;
    Ok(Outcome { csv: Some(r.table.to_csv()), results: to_value(&r), refs: vec!["protocols::swap_verify"] })
}

#[derive(Serialize)]
struct AttackRow {
    alpha: f64,
    q: f64,
    q_prime: f64,
    q_alpha: f64,
}

fn run_attack(a: &AttackArgs) -> Result<Outcome> {
    let (t, f) = (a.theta.to_radians(), a.phi.to_radians());
    let alphas: Vec<f64> = match a.alpha {
        Some(x) => vec![x],
        None => (0..=10).map(|k| k as f64 / 10.0).collect(),
    };
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let r = protocols::hardy_attack(&AttackConfig::new(t, f, alpha)?)?;
            Ok(AttackRow { alpha, q: r.q, q_prime: r.q_prime, q_alpha: r.q_alpha })
        })
        .collect::<Result<Vec<_>>>()?;
    let exchanged = protocols::q_exchanged(&HardyParams::new(t, f)?);
    Ok(Outcome {
        results: json!({ "rows": rows, "q_exchanged_state": exchanged }),
        csv: Some(csv_rows(&rows)?),
        refs: vec!["protocols::hardy_attack", "hardy::hardy_q"],
    })
}

#[derive(Serialize)]
struct SampleRow {
    theta_deg: f64,
    phi_deg: f64,
    event: &'static str,
    mean: f64,
    sd: f64,
    ci_low: f64,
    ci_high: f64,
}

const EVENT_NAMES: [&str; 4] = ["e1", "e2", "e3", "e5"];

fn run_hardy(cmd: &HardyCmd) -> Result<Outcome> {
    match cmd {
        HardyCmd::Probs(a) => {
            let p = hardy_params(a)?;
            let probs = hardy::hardy_probs(&p);
            Ok(Outcome {
                results: json!({
                    "chi_deg": p.chi.to_degrees(),
                    "probs": probs,
                    "gate_built_probs": hardy::hardy_probs_gate_built(&p),
                    "q": hardy::hardy_q(&p),
                    "chsh_lhs": hardy::chsh_hardy_lhs(&probs),
                }),
                csv: Some(format!("p1,p2,p3,p4\n{},{},{},{}\n", probs[0], probs[1], probs[2], probs[3])),
                refs: vec!["hardy::hardy_probs", "hardy::hardy_q"],
            })
        }
        HardyCmd::Qmax => {
            let r = hardy::qmax_solve()?;
            Ok(Outcome {
                results: json!({
                    "theta_deg": r.theta.to_degrees(),
                    "phi_deg": r.phi.to_degrees(),
                    "q_max": r.q_max,
                    "closed_form": hardy::qmax_closed_form(),
                }),
                csv: None,
                refs: vec!["hardy::qmax_solve"],
            })
        }
        HardyCmd::Sample { angles, noise, alpha } => {
            let p = hardy_params(angles)?;
            let model = noise_model(noise)?;
            let sets = hardy::noisy_sample(&p, &model, noise.runs, noise.seed)?;
            let mut rows = Vec::new();
            for (event, s) in EVENT_NAMES.iter().zip(&sets) {
                let (ci_low, ci_high) = if s.n > 1 { hardy::t_ci(s, *alpha)? } else { (f64::NAN, f64::NAN) };
                rows.push(SampleRow {
                    theta_deg: angles.theta,
                    phi_deg: angles.phi,
                    event,
                    mean: s.mean,
                    sd: s.sd,
                    ci_low,
                    ci_high,
                });
            }
            let means = sets.each_ref().map(|s| s.mean);
            Ok(Outcome {
                results: json!({
                    "noise": model,
                    "events": EVENT_NAMES.iter().zip(&sets).map(|(n, s)| json!({"event": n, "set": s})).collect::<Vec<_>>(),
                    "chsh_lhs_of_means": hardy::chsh_hardy_lhs(&means),
                }),
                csv: Some(csv_rows(&rows)?),
                refs: vec!["hardy::noisy_sample"],
            })
        }
        HardyCmd::Estimate { angles, noise, alpha } => {
            let p = hardy_params(angles)?;
            let model = noise_model(noise)?;
            let offline = hardy::offline_sets(&model, noise.runs, noise.seed.wrapping_add(1000))?;
            let [_, _, _, e5] = hardy::noisy_sample(&p, &model, noise.runs, noise.seed)?;
            let est = hardy::estimate_qlb(&offline, &e5, *alpha)?;
            let off: Vec<Value> = hardy::OFFLINE_SETTINGS
                .iter()
                .zip(&offline)
                .map(|(&(t, f), s)| json!({"theta_deg": t, "phi_deg": f, "mean": s.mean, "sd": s.sd}))
                .collect();
            Ok(Outcome {
                csv: Some(format!(
                    "theta_deg,phi_deg,q,eps5_bar,s_eps5,sigma4_bar,s_sigma4,delta,q_lb_hat\n{},{},{},{},{},{},{},{},{}\n",
                    angles.theta,
                    angles.phi,
                    hardy::hardy_q(&p),
                    est.eps5_bar,
                    est.s_eps5,
                    est.sigma4_bar,
                    est.s_sigma4,
                    est.delta,
                    est.q_lb_hat
                )),
                results: json!({ "q": hardy::hardy_q(&p), "offline": off, "estimate": est }),
                refs: vec!["hardy::estimate_qlb", "hardy::diff_lower_bound", "hardy::t_quantile"],
            })
        }
    }
}

fn dispatch(cmd: &Cmd) -> Result<Outcome> {
    match cmd {
        Cmd::Tables(a) => run_tables(a),
        Cmd::Chsh(a) => run_chsh(a),
        Cmd::Trace(a) => run_trace(a),
        Cmd::Monogamy(a) => run_monogamy(a),
        Cmd::Cases(a) => run_cases(a),
        Cmd::FidelityRelation(a) => run_relation(a),
        Cmd::SfBound(a) => run_sf_bound(a),
        Cmd::Signaling(a) => run_signaling(a),
        Cmd::Qpq(a) => run_qpq(a),
        Cmd::Swap(a) => run_swap(a),
        Cmd::Attack(a) => run_attack(a),
        Cmd::Hardy { cmd } => run_hardy(cmd),
    }
}

/// Round every float to 12 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let r: f64 = format!("{x:.11e}").parse().expect("round trip");
            *v = serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null);
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(o) => o.iter().for_each(|(k, x)| {
            let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            flatten(&p, x, out)
        }),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&format!("{prefix}[{i}]"), x, out)),
        _ => out.push(format!("{prefix} = {v}")),
    }
}

/// Parse `key=value` lines into long flags. `true` makes a bare flag and
/// `false` drops it.
pub fn config_args(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidParam(format!("config line {}: expected key=value", no + 1)))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k == "config" {
            return Err(Error::InvalidParam("config files cannot nest".into()));
        }
        match v {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    Ok(out)
}

const GLOBAL_VALUED: [&str; 4] = ["--config", "--format", "--out", "--csv"];

/// Splice the config file flags in right after the subcommand path so that
/// later command-line flags override them.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| Error::InvalidParam(format!("cannot read {path}: {e}")))?;
    let extra = config_args(&text)?;
    let mut pos = 1;
    let mut positional = 0;
    while pos < argv.len() {
        let a = &argv[pos];
        if GLOBAL_VALUED.contains(&a.as_str()) {
            pos += 2;
            continue;
        }
        if a.starts_with('-') {
            pos += 1;
            continue;
        }
        positional += 1;
        pos += 1;
        if !(a == "hardy" && positional == 1) {
            break;
        }
    }
    let mut out = argv[..pos.min(argv.len())].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos.min(argv.len())..]);
    Ok(out)
}

fn command() -> clap::Command {
    fn overriding(c: clap::Command) -> clap::Command {
        // Append would merge list flags from the file with the command line.
        let c = c.mut_args(|a| match a.get_action() {
            ArgAction::Append => a.action(ArgAction::Set),
            _ => a,
        });
        c.args_override_self(true).mut_subcommands(overriding)
    }
    overriding(Cli::command())
}

fn emit(path: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Run one command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = args.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let cli = match command().try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let outcome = match dispatch(&cli.cmd) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_numeric() { EXIT_NUMERIC } else { EXIT_INVALID };
        }
    };
    let mut record = json!({
        "schema_version": SCHEMA_VERSION,
        "config": to_value(&cli.cmd),
        "results": outcome.results,
        "provenance": {
            "paper_eq_refs": outcome.refs,
            "version": format!("hyperent {}", env!("CARGO_PKG_VERSION")),
        },
    });
    round_floats(&mut record);
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&record).expect("json") + "\n",
        Format::Csv => match &outcome.csv {
            Some(c) => c.clone(),
            None => {
                eprintln!("error: this command has no CSV form");
                return EXIT_INVALID;
            }
        },
        Format::Text => {
            let mut lines = Vec::new();
            flatten("", &record["results"], &mut lines);
            lines.join("\n") + "\n"
        }
    };
    if let Err(e) = emit(&cli.out, &body) {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    if let (Some(p), Some(c)) = (&cli.csv, &outcome.csv) {
        if let Err(e) = fs::write(p, c) {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    }
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines_become_flags() {
        let a = config_args("# c\nkind = boson\nno_project=true\nx=false\n").unwrap();
        assert_eq!(a, vec!["--kind=boson".to_string(), "--no-project".to_string()]);
        assert!(config_args("oops").is_err());
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        let mut v = json!({"x": [std::f64::consts::PI]});
        round_floats(&mut v);
        assert_eq!(v["x"][0].as_f64().unwrap(), 3.14159265359);
    }

    #[test]
    fn parser_is_consistent() {
        command().debug_assert();
    }
}

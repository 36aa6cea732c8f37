use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use super::format::{sig9, to_json};
use super::{AuditArgs, CalibrateArgs, Cli, Command, DataKind, DemoArgs, GenDataArgs, ProgramArgs, TrainArgs, EXIT_INFEASIBLE, EXIT_OK, SEED_ENV};
use crate::error::{AmpcError, Result};
use crate::exec::Execution;
use crate::learn::{
    centralized_baseline, load_csv, split_clients, synthetic_linear, synthetic_separable, train, train_test_split,
    IterationRecord, LabeledTable, Normalization, Task, TrainConfig, TrainOutcome,
};
use crate::mpc::{beaver_multiply, collect_result, orchestrate, provision_triples, share_secrets, NoiseParams, Program, ShareJob, TripleDims};
use crate::network::{NetworkHandle, NetworkOptions, Tag};
use crate::numerics::{Complex64, RealMatrix};
use crate::privacy::{analytic_violation_prob, audit_mechanism, calibrate, compute_sensitivity, NeighborSpec, PrivacyBudget};

const PRIVACY_NOTE: &str = "privacy: (ε, δ) holds per released share; repeated releases over iterations are not composed";

pub(super) fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match cli.command {
        Command::Calibrate(a) => cmd_calibrate(a, out, err),
        Command::Train(a) => cmd_train(a, exec, out, err),
        Command::Audit(a) => cmd_audit(a, exec, out),
        Command::Demo(a) => cmd_demo(a, exec, out),
        Command::RunProgram(a) => cmd_run_program(a, exec, out),
        Command::GenData(a) => cmd_gen_data(a, out),
    }
}

fn check_threshold(n: usize, t: usize) -> Result<()> {
    if n < 2 || t == 0 || t >= n {
        return Err(AmpcError::invalid(format!("need N ≥ 2 and 1 ≤ T ≤ N−1, got N={n}, T={t}")));
    }
    Ok(())
}

fn budget_json(b: &PrivacyBudget) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(b)?;
    v["attained_violation"] = json!(b.attained_violation()?);
    Ok(v)
}

fn cmd_calibrate(a: CalibrateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if a.t_colluders == 0 {
        return Err(AmpcError::invalid("--t-colluders must be at least 1"));
    }
    let spec = NeighborSpec { record_bound: a.record_bound.unwrap_or(1.0), delta_override: a.sensitivity };
    let delta_s = compute_sensitivity(&spec)?;
    match calibrate(a.epsilon, a.delta, a.trunc_t, delta_s, a.t_colluders) {
        Ok(b) => {
            writeln!(out, "{}", to_json(&budget_json(&b)?)?)?;
            writeln!(err, "{PRIVACY_NOTE}")?;
            Ok(EXIT_OK)
        }
        Err(AmpcError::InfeasibleBudget(reason)) => {
            writeln!(out, "{}", to_json(&json!({"feasible": false, "reason": reason}))?)?;
            writeln!(err, "infeasible budget: {reason}")?;
            Ok(EXIT_INFEASIBLE)
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct BudgetReport {
    #[serde(flatten)]
    budget: PrivacyBudget,
    attained_violation: f64,
    noise_multiplier: f64,
    effective_sigma_s: f64,
    effective_triple_sigma: f64,
    n_clients: usize,
    note: &'static str,
}

fn pooled(parts: &[crate::learn::Dataset]) -> Result<(RealMatrix, Vec<f64>)> {
    let x = RealMatrix::vstack(&parts.iter().map(|d| d.features.clone()).collect::<Vec<_>>())?;
    Ok((x, parts.iter().flat_map(|d| d.labels.iter().copied()).collect()))
}

fn write_metrics(
    path: &Path,
    task: Task,
    trace: &[IterationRecord],
    train_set: &(RealMatrix, Vec<f64>),
    test_set: Option<&(RealMatrix, Vec<f64>)>,
    sigma_s: f64,
    wall_clock: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "train_metric", "test_metric", "sigma_s", "wall_ms"])?;
    for rec in trace.iter().skip(1) {
        let tr = task.metric(&rec.weights, &train_set.0, &train_set.1)?;
        let te = test_set.map(|(x, y)| task.metric(&rec.weights, x, y)).transpose()?;
        let ms = if wall_clock { rec.elapsed.as_secs_f64() * 1e3 } else { 0.0 };
        w.write_record([
            rec.iteration.to_string(),
            sig9(tr),
            te.map(sig9).unwrap_or_default(),
            sig9(sigma_s),
            sig9(ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Everything one training experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub budget: PrivacyBudget,
    pub noise: NoiseParams,
    pub decentralized: TrainOutcome,
    pub centralized: Vec<IterationRecord>,
    pub train_set: (RealMatrix, Vec<f64>),
    pub test_set: Option<(RealMatrix, Vec<f64>)>,
    pub warnings: Vec<String>,
}

impl ExperimentOutcome {
    /// Final (train, test) metric of the decentralized and the centralized run.
    pub fn final_metrics(&self, task: Task) -> Result<[(f64, Option<f64>); 2]> {
        let eval = |w: &[f64]| -> Result<(f64, Option<f64>)> {
            let tr = task.metric(w, &self.train_set.0, &self.train_set.1)?;
            let te = self.test_set.as_ref().map(|(x, y)| task.metric(w, x, y)).transpose()?;
            Ok((tr, te))
        };
        let last = |t: &[IterationRecord]| t.last().expect("w0 always recorded").weights.clone();
        Ok([eval(&last(&self.decentralized.trace))?, eval(&last(&self.centralized))?])
    }
}

/// Calibrates, loads and splits the data, then runs collaborative training
/// and the centralized baseline on the same schedule.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution, options: NetworkOptions) -> Result<(ExperimentOutcome, NetworkHandle)> {
    cfg.validate()?;
    let budget = calibrate(cfg.epsilon, cfg.delta, cfg.trunc_t, cfg.sensitivity()?, cfg.t_colluders)?;
    let noise = NoiseParams {
        sigma_s: budget.sigma_s * cfg.noise_multiplier,
        triple_sigma: budget.sigma * cfg.noise_multiplier,
        trunc_t: cfg.trunc_t,
    };
    let mut warnings = Vec::new();
    let table = load_csv(&cfg.dataset_path, &cfg.label_column)?;
    let (train_table, test_table) = train_test_split(&table, cfg.test_fraction, cfg.seed)?;
    let (mut parts, warning) = split_clients(&train_table, cfg.n_clients, cfg.record_bound)?;
    warnings.extend(warning);
    if cfg.task == Task::Linear {
        let clipped: usize = parts.iter_mut().map(|d| d.clip_labels(1.0)).sum();
        if clipped > 0 {
            warnings.push(format!("{clipped} training labels clipped to [-1, 1]"));
        }
    }
    // The test set is normalized with the average of the clients' maps.
    let norms: Vec<Normalization> = parts.iter().filter_map(|d| d.normalization.clone()).collect();
    let test_norm = Normalization::average(&norms)?;
    let test_set = (test_table.rows() > 0)
        .then(|| (test_norm.apply_clipped(&test_table.features, cfg.record_bound), test_table.labels.clone()));
    let train_set = pooled(&parts)?;

    let tc = TrainConfig {
        task: cfg.task,
        gamma: cfg.gamma,
        iterations: cfg.iterations,
        batch: cfg.batch,
        seed: cfg.seed,
        noise,
        init: None,
    };
    let mut net = NetworkHandle::spawn_with(cfg.n_clients, cfg.t_colluders, cfg.seed, options)?;
    let decentralized = train(&mut net, exec, &parts, &tc)?;
    let centralized = centralized_baseline(&parts, &tc)?;
    let outcome = ExperimentOutcome { budget, noise, decentralized, centralized, train_set, test_set, warnings };
    Ok((outcome, net))
}

fn cmd_train(a: TrainArgs, exec: Execution, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Ok(s) = std::env::var(SEED_ENV) {
        cfg.seed = s.parse().map_err(|_| AmpcError::Config(format!("{SEED_ENV}='{s}' is not an unsigned integer")))?;
    }
    let options = NetworkOptions { digests: a.dump_transcript.is_some(), ..NetworkOptions::default() };
    let (res, net) = match run_experiment(&cfg, exec, options) {
        Ok(r) => r,
        Err(AmpcError::InfeasibleBudget(reason)) => {
            writeln!(err, "infeasible budget: {reason}")?;
            return Ok(EXIT_INFEASIBLE);
        }
        Err(e) => return Err(e),
    };
    for w in &res.warnings {
        writeln!(err, "warning: {w}")?;
    }

    fs::create_dir_all(&a.out)?;
    let metrics = |name: &str, trace: &[IterationRecord], sigma_s: f64| {
        write_metrics(&a.out.join(name), cfg.task, trace, &res.train_set, res.test_set.as_ref(), sigma_s, a.wall_clock)
    };
    metrics("metrics_decentralized.csv", &res.decentralized.trace, res.noise.sigma_s)?;
    metrics("metrics_centralized.csv", &res.centralized, 0.0)?;
    fs::write(a.out.join("weights.json"), to_json(&res.decentralized.weights)? + "\n")?;
    let report = BudgetReport {
        budget: res.budget,
        attained_violation: res.budget.attained_violation()?,
        noise_multiplier: cfg.noise_multiplier,
        effective_sigma_s: res.noise.sigma_s,
        effective_triple_sigma: res.noise.triple_sigma,
        n_clients: cfg.n_clients,
        note: PRIVACY_NOTE,
    };
    fs::write(a.out.join("budget.json"), to_json(&report)? + "\n")?;
    if let Some(p) = &a.dump_transcript {
        net.dump_transcript(BufWriter::new(File::create(p)?))?;
    }

    let [dec, cen] = res.final_metrics(cfg.task)?;
    let fmt = |(tr, te): (f64, Option<f64>)| format!("train {} test {}", sig9(tr), te.map(sig9).unwrap_or_else(|| "-".into()));
    writeln!(out, "{} after {} iterations (σ_s = {})", cfg.task.metric_name(), cfg.iterations, sig9(res.noise.sigma_s))?;
    writeln!(out, "  decentralized: {}", fmt(dec))?;
    writeln!(out, "  centralized:   {}", fmt(cen))?;
    writeln!(out, "outputs written to {}", a.out.display())?;
    writeln!(out, "{PRIVACY_NOTE}")?;
    Ok(EXIT_OK)
}

fn cmd_audit(a: AuditArgs, exec: Execution, out: &mut dyn Write) -> Result<i32> {
    if a.samples == 0 {
        return Err(AmpcError::invalid("--samples must be at least 1"));
    }
    let (sigma, eps, delta, t, d) = match &a.from_budget {
        Some(p) => {
            let b: PrivacyBudget = serde_json::from_str(&fs::read_to_string(p)?)?;
            (b.sigma, b.epsilon, b.delta, b.t, b.delta_sensitivity)
        }
        None => {
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| AmpcError::invalid(format!("--{name} is required with --sigma")));
            (
                need(a.sigma, "sigma")?,
                need(a.epsilon, "epsilon")?,
                need(a.delta, "delta")?,
                need(a.trunc_t, "trunc-t")?,
                need(a.sensitivity, "sensitivity")?,
            )
        }
    };
    let sigma = sigma * a.sigma_scale;
    let r = audit_mechanism(sigma, d, t, eps, a.samples, a.seed, exec)?;
    let report = json!({
        "sigma": sigma,
        "epsilon": eps,
        "delta": delta,
        "samples": r.n_samples,
        "violations": r.violations,
        "empirical": r.empirical,
        "stderr": r.stderr,
        "analytic": analytic_violation_prob(sigma, eps, d, t)?,
        "pass": r.passes(delta),
    });
    writeln!(out, "{}", to_json(&report)?)?;
    Ok(EXIT_OK)
}

fn complex(z: Complex64) -> String {
    format!("{:.6} {} {:.6}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
}

fn cmd_demo(a: DemoArgs, exec: Execution, out: &mut dyn Write) -> Result<i32> {
    check_threshold(a.n, a.t_colluders)?;
    let noise = NoiseParams {
        sigma_s: a.sigma_s,
        triple_sigma: a.sigma_s * (a.t_colluders as f64).sqrt(),
        trunc_t: a.trunc_t,
    };
    let mut net = NetworkHandle::spawn(a.n, a.t_colluders, a.seed)?;
    writeln!(out, "sharing secret {} among N={} clients (T={}, σ_s={})", sig9(a.secret), a.n, a.t_colluders, sig9(a.sigma_s))?;
    let job = ShareJob { owner: 1, label: "secret".into(), secret: RealMatrix::scalar(a.secret).to_complex() };
    let shares = share_secrets(&mut net, exec, vec![job], noise, Tag::DataShare)?.remove(0);
    for s in &shares {
        writeln!(out, "  client {} holds S(ω_{}) = {}", s.eval_index(), s.eval_index(), complex(s.value().get(0, 0)))?;
    }
    let rec = collect_result(&mut net, &shares, 1, "secret/open")?;
    let used: Vec<String> = rec.indices.iter().map(|i| i.to_string()).collect();
    writeln!(out, "reconstructed: {:.6} (from clients {})", rec.value.get(0, 0), used.join(", "))?;

    if let Some(ab) = &a.multiply {
        let (x, y) = (ab[0], ab[1]);
        let jobs = vec![
            ShareJob { owner: 1, label: "a".into(), secret: RealMatrix::scalar(x).to_complex() },
            ShareJob { owner: 2, label: "b".into(), secret: RealMatrix::scalar(y).to_complex() },
        ];
        let mut s = share_secrets(&mut net, exec, jobs, noise, Tag::DataShare)?;
        let (sb, sa) = (s.remove(1), s.remove(0));
        let triple = provision_triples(&mut net, exec, &[TripleDims { m: 1, k: 1, n: 1 }], noise)?.remove(0);
        let prod = beaver_multiply(&mut net, exec, "a*b", sa, sb, triple)?;
        for o in &prod.opened {
            writeln!(out, "  opened {} = {}", o.name, complex(o.value.get(0, 0)))?;
        }
        let rec = collect_result(&mut net, &prod.shares, 1, "a*b/open")?;
        writeln!(out, "product {} × {}: {:.6}", sig9(x), sig9(y), rec.value.get(0, 0))?;
    }
    Ok(EXIT_OK)
}

fn cmd_run_program(a: ProgramArgs, exec: Execution, out: &mut dyn Write) -> Result<i32> {
    check_threshold(a.n_clients, a.t_colluders)?;
    let program = Program::from_json(&fs::read_to_string(&a.program)?)?;
    let mut values = program.embedded_values()?;
    if let Some(p) = &a.values {
        let raw: BTreeMap<String, Vec<Vec<f64>>> = serde_json::from_str(&fs::read_to_string(p)?)?;
        for (k, rows) in raw {
            values.insert(k, RealMatrix::from_rows(&rows)?);
        }
    }
    let noise = NoiseParams {
        sigma_s: a.sigma_s,
        triple_sigma: a.sigma_s * (a.t_colluders as f64).sqrt(),
        trunc_t: a.trunc_t,
    };
    let options = NetworkOptions { digests: a.dump_transcript.is_some(), ..NetworkOptions::default() };
    let mut net = NetworkHandle::spawn_with(a.n_clients, a.t_colluders, a.seed, options)?;
    let res = orchestrate(&mut net, exec, &program, &values, noise)?;
    let outputs: BTreeMap<&String, serde_json::Value> = res
        .outputs
        .iter()
        .map(|(name, (client, rec))| {
            let rows: Vec<Vec<f64>> = (0..rec.value.rows()).map(|r| rec.value.row(r).to_vec()).collect();
            (name, json!({"client": client, "value": rows, "max_imag": rec.max_imag}))
        })
        .collect();
    writeln!(out, "{}", to_json(&json!({"outputs": outputs, "rounds": res.rounds, "triples_used": res.triples_used}))?)?;
    if let Some(p) = &a.dump_transcript {
        net.dump_transcript(BufWriter::new(File::create(p)?))?;
    }
    Ok(EXIT_OK)
}

fn write_table(path: &Path, t: &LabeledTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = t.feature_names.clone();
    header.push("y".into());
    w.write_record(&header)?;
    for r in 0..t.rows() {
        let mut row: Vec<String> = t.features.row(r).iter().map(f64::to_string).collect();
        row.push(t.labels[r].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_gen_data(a: GenDataArgs, out: &mut dyn Write) -> Result<i32> {
    if a.rows == 0 || a.features == 0 {
        return Err(AmpcError::invalid("--rows and --features must be positive"));
    }
    match a.kind {
        DataKind::Separable => {
            write_table(&a.out, &synthetic_separable(a.rows, a.features, a.seed)?)?;
            writeln!(out, "wrote {} rows to {}", a.rows, a.out.display())?;
        }
        DataKind::Linear => {
            let (t, coef) = synthetic_linear(a.rows, a.features, a.seed)?;
            write_table(&a.out, &t)?;
            writeln!(out, "{}", to_json(&json!({"intercept": coef[0], "weights": &coef[1..]}))?)?;
        }
    }
    Ok(EXIT_OK)
}

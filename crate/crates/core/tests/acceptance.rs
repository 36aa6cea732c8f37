//! Acceptance suite: one PASS/FAIL line per criterion, with runtimes.
//! Run with `cargo test --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ampc::cli::{run_experiment, ExperimentConfig};
use ampc::learn::{
    centralized_baseline, private_mul, private_mul_triple_dims, split_clients, synthetic_linear, synthetic_separable,
    train, Task, TrainConfig,
};
use ampc::mpc::{beaver_multiply, provision_triples, share_secrets, NoiseParams, ShareJob, TripleDims};
use ampc::network::{NetworkHandle, NetworkOptions, Tag};
use ampc::numerics::{roots_of_unity, vandermonde_info, Complex64, ComplexMatrix, RealMatrix};
use ampc::privacy::{
    alpha_upper, analytic_violation_prob, audit_mechanism, b_objective, b_objective_terms, calibrate, strictly_decreasing,
    PrivacyBudget,
};
use ampc::rng::{self, StreamRng};
use ampc::sharing::{
    evaluate_shares, make_share_polynomial, perturbation_bound, reconstruct, underdetermination_witness,
    PerturbationBoundInputs, Share,
};
use ampc::Execution;
use rand::Rng;

type Outcome = Result<String, String>;

const SEED: u64 = 20_240_601;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn uniform(r: &mut StreamRng, rows: usize, cols: usize) -> RealMatrix {
    RealMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn rel_frob(got: &RealMatrix, want: &RealMatrix) -> f64 {
    got.sub(want).unwrap().frobenius() / want.frobenius().max(f64::MIN_POSITIVE)
}

/// Secrets and their shares for criteria 1 and 2.
struct Corpus {
    n: usize,
    secrets: Vec<(RealMatrix, Vec<Share>)>,
}

fn corpus() -> Vec<Corpus> {
    (2..=8)
        .map(|n| {
            let mut r = rng::derive(SEED, &[1, n as u64]);
            let secrets = (0..500)
                .map(|_| {
                    let s = uniform(&mut r, 3, 3);
                    let p = make_share_polynomial("s", s.clone(), n - 1, n, 1.0, 50.0, &mut r).unwrap();
                    (s, evaluate_shares(&p))
                })
                .collect();
            Corpus { n, secrets }
        })
        .collect()
}

fn c1_reconstruction(corpora: &[Corpus]) -> Outcome {
    let (mut worst, mut count) = (0.0f64, 0usize);
    for c in corpora {
        for (s, shares) in &c.secrets {
            for pick in subsets(c.n, c.n) {
                let sel: Vec<&Share> = pick.iter().map(|&i| &shares[i]).collect();
                let rec = reconstruct(&sel).map_err(e)?;
                worst = worst.max(rec.value.max_abs_diff(s));
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max entrywise error {worst:.3e} > 1e-9"))?;
    Ok(format!("{count} subsets, max error {worst:.2e}"))
}

fn c2_underdetermination(corpora: &[Corpus]) -> Outcome {
    let (mut count, mut min_dist, mut worst_fit) = (0usize, f64::INFINITY, 0.0f64);
    for c in corpora {
        for (s, shares) in &c.secrets {
            for pick in subsets(c.n, c.n - 1) {
                let sel: Vec<&Share> = pick.iter().map(|&i| &shares[i]).collect();
                let w = underdetermination_witness(&sel, s).map_err(e)?;
                for sh in &sel {
                    let fit = w.evaluate(sh.eval_index()).max_abs_diff(sh.value()) / sh.value().frobenius().max(1.0);
                    worst_fit = worst_fit.max(fit);
                }
                min_dist = min_dist.min(w.constant.re().sub(s).unwrap().frobenius());
                count += 1;
            }
        }
    }
    ensure(worst_fit <= 1e-9, || format!("witness misses a share by {worst_fit:.3e}"))?;
    ensure(min_dist >= 1.0 - 1e-12, || format!("a witness constant is only {min_dist} away"))?;
    Ok(format!("{count} T-subsets, all consistent, min distance {min_dist:.6}"))
}

fn c3_beaver() -> Outcome {
    let mut r = rng::derive(SEED, &[3]);
    let noise = NoiseParams { sigma_s: 1.0, triple_sigma: 1.0, trunc_t: 100.0 };
    let (mut worst, mut worst_subset) = (0.0f64, 0.0f64);
    for case in 0..200u64 {
        let n = r.random_range(2..=6);
        let t = r.random_range(1..n);
        let (m, k, p) = (r.random_range(1..=4), r.random_range(1..=4), r.random_range(1..=4));
        let (u, v) = (uniform(&mut r, m, k), uniform(&mut r, k, p));
        let mut net = NetworkHandle::spawn(n, t, SEED ^ case).map_err(e)?;
        let jobs = vec![
            ShareJob { owner: 1, label: "u".into(), secret: u.to_complex() },
            ShareJob { owner: 2, label: "v".into(), secret: v.to_complex() },
        ];
        let mut s = share_secrets(&mut net, Execution::default(), jobs, noise, Tag::DataShare).map_err(e)?;
        let (sv, su) = (s.remove(1), s.remove(0));
        let dims = TripleDims::for_product((m, k), (k, p)).map_err(e)?;
        let triple = provision_triples(&mut net, Execution::default(), &[dims], noise).map_err(e)?.remove(0);
        let out = beaver_multiply(&mut net, Execution::default(), "uv", su, sv, triple).map_err(e)?;
        let want = u.matmul(&v).unwrap();
        worst = worst.max(rel_frob(&reconstruct(&out.shares).map_err(e)?.value, &want));
        let first = reconstruct(&out.shares).map_err(e)?.value;
        for pick in subsets(n, t + 1) {
            let sel: Vec<&Share> = pick.iter().map(|&i| &out.shares[i]).collect();
            let v = reconstruct(&sel).map_err(e)?.value;
            worst_subset = worst_subset.max(rel_frob(&v, &first));
        }
    }
    ensure(worst <= 1e-8, || format!("relative Frobenius error {worst:.3e} > 1e-8"))?;
    ensure(worst_subset <= 1e-8, || format!("subsets disagree by {worst_subset:.3e}"))?;
    Ok(format!("200 products, max rel error {worst:.2e}, subset spread {worst_subset:.2e}"))
}

fn c4_private_mul() -> Outcome {
    let mut r = rng::derive(SEED, &[4]);
    let mut worst_avg = 0.0f64;
    for n in 2..=8 {
        for t in 1..n {
            let u = uniform(&mut r, 3, 3);
            let shares = evaluate_shares(&make_share_polynomial("u", u.clone(), t, n, 1.0, 50.0, &mut r).map_err(e)?);
            let mut acc = ComplexMatrix::zeros(3, 3);
            for s in &shares {
                acc.axpy(Complex64::new(1.0 / n as f64, 0.0), s.value()).map_err(e)?;
            }
            worst_avg = worst_avg.max(acc.re().max_abs_diff(&u)).max(acc.max_abs_imag());
        }
    }
    ensure(worst_avg <= 1e-12, || format!("share average off by {worst_avg:.3e}"))?;

    let noise = NoiseParams { sigma_s: 1.0, triple_sigma: 1.0, trunc_t: 100.0 };
    let mut worst = 0.0f64;
    for case in 0..50u64 {
        let n = r.random_range(2..=6);
        let t = r.random_range(1..n);
        let (m, k, p) = (r.random_range(1..=4), r.random_range(1..=4), r.random_range(1..=4));
        let (u, v) = (uniform(&mut r, m, k), uniform(&mut r, k, p));
        let su = evaluate_shares(&make_share_polynomial("U", u.clone(), t, n, 1.0, 50.0, &mut r).map_err(e)?);
        let sv = evaluate_shares(&make_share_polynomial("V", v.clone(), t, n, 1.0, 50.0, &mut r).map_err(e)?);
        let mut net = NetworkHandle::spawn(n, t, SEED ^ case).map_err(e)?;
        let dims = private_mul_triple_dims(u.shape(), v.shape(), n).map_err(e)?;
        let triples = provision_triples(&mut net, Execution::default(), &dims, noise).map_err(e)?;
        let out = private_mul(&mut net, Execution::default(), "uv", &su, &sv, triples, noise).map_err(e)?;
        worst = worst.max(rel_frob(&reconstruct(&out.shares).map_err(e)?.value, &u.matmul(&v).unwrap()));
    }
    ensure(worst <= 1e-7, || format!("PrivateMul relative error {worst:.3e} > 1e-7"))?;
    Ok(format!("share average max error {worst_avg:.2e}; 50 products, max rel error {worst:.2e}"))
}

/// Naive closed form of the violation objective, used as the grid oracle.
fn oracle_b(alpha: f64, eps: f64, t: f64, d: f64) -> f64 {
    let phi = |x: f64| 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
    let k = (eps / 2.0).sqrt();
    let a = k * (alpha + 1.0 / alpha);
    let b = k * (1.0 / alpha - alpha);
    let c = t * (2.0 * eps).sqrt() / (alpha * d);
    1.0 - (phi(a) - phi(b)) / (2.0 * phi(c) - 1.0)
}

struct CalibCase {
    eps: f64,
    delta: f64,
    t: f64,
    d: f64,
    degree: usize,
    budget: PrivacyBudget,
}

/// 50 random feasible configurations: ε, δ log-uniform, Δ uniform, and
/// t = (Δ/ε)·U[50, 500], redrawn until B(α_hi) ≤ δ.
fn calibration_cases() -> Result<Vec<CalibCase>, String> {
    let mut r = rng::derive(SEED, &[5]);
    let mut out = Vec::new();
    while out.len() < 50 {
        let eps = 10f64.powf(r.random_range(-4.0..-1.0));
        let delta = 10f64.powf(r.random_range(-9.0..-4.0));
        let d = r.random_range(0.01..2.0);
        let t = d / eps * r.random_range(50.0..500.0);
        let hi = alpha_upper(t, d).map_err(e)? * (1.0 - 1e-12);
        if b_objective(hi, eps, t, d).map_err(e)? > delta {
            continue;
        }
        let degree = r.random_range(1..=8);
        let budget = calibrate(eps, delta, t, d, degree).map_err(e)?;
        out.push(CalibCase { eps, delta, t, d, degree, budget });
    }
    Ok(out)
}

fn c5_calibration(cases: &[CalibCase]) -> Outcome {
    const GRID: usize = 1_000_000;
    let (mut worst_rel, mut worst_gap) = (0.0f64, 0.0f64);
    for c in cases {
        let hi = alpha_upper(c.t, c.d).map_err(e)? * (1.0 - 1e-12);
        let lo = hi * 1e-6;
        let ratio = (hi / lo).ln() / (GRID - 1) as f64;
        let grid = |i: usize| lo * (ratio * i as f64).exp();
        let mut oracle = None;
        let mut prev = b_objective_terms(grid(0), c.eps, c.t, c.d).map_err(e)?;
        for i in 0..GRID {
            let a = grid(i);
            if i > 0 {
                let cur = b_objective_terms(a, c.eps, c.t, c.d).map_err(e)?;
                ensure(strictly_decreasing(&prev, &cur), || format!("B not decreasing at α = {a:e}"))?;
                prev = cur;
            }
            if oracle.is_none() && oracle_b(a, c.eps, c.t, c.d) <= c.delta {
                oracle = Some(a);
            }
        }
        let oracle = oracle.ok_or("grid oracle found no root")?;
        let rel = (c.budget.alpha_star - oracle).abs() / oracle;
        worst_rel = worst_rel.max(rel);
        let attained = c.budget.attained_violation().map_err(e)?;
        ensure(attained <= c.delta && attained >= c.delta - 1e-9, || format!("B(α*) = {attained:e} vs δ = {:e}", c.delta))?;
        worst_gap = worst_gap.max(c.delta - attained);
    }
    ensure(worst_rel <= 1e-4, || format!("α* off the grid oracle by {worst_rel:.3e} relative"))?;
    Ok(format!("50 configs, α* vs grid max rel {worst_rel:.2e}, max δ − B(α*) {worst_gap:.2e}, B decreasing on all grids"))
}

fn c6_sigma_split(cases: &[CalibCase]) -> Outcome {
    let mut worst = 0.0f64;
    for c in cases {
        let b = &c.budget;
        worst = worst.max((b.sigma_s * (c.degree as f64).sqrt() - b.sigma).abs() / b.sigma);
    }
    ensure(worst <= 1e-15, || format!("σ_s·√T deviates from σ by {worst:.3e} relative"))?;
    Ok(format!("50 configs, max rel deviation {worst:.2e}"))
}

fn c7_audit(cases: &[CalibCase]) -> Outcome {
    let mut worst_analytic = 0.0f64;
    let mut worst_margin = f64::NEG_INFINITY;
    for (i, c) in cases.iter().take(20).enumerate() {
        let a = audit_mechanism(c.budget.sigma, c.d, c.t, c.eps, 1_000_000, SEED + i as u64, Execution::default()).map_err(e)?;
        ensure(a.passes(c.delta), || format!("config {i}: empirical {:e} > δ + 3·se", a.empirical))?;
        worst_margin = worst_margin.max(a.empirical - c.delta - 3.0 * a.stderr);
        let p = analytic_violation_prob(c.budget.sigma, c.eps, c.d, c.t).map_err(e)?;
        worst_analytic = worst_analytic.max((p - c.delta).abs());
    }
    ensure(worst_analytic <= 1e-9, || format!("analytic probability off δ by {worst_analytic:.3e}"))?;
    Ok(format!("20 configs × 10⁶ samples pass, max |P − δ| {worst_analytic:.2e}"))
}

fn c8_lockstep() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2usize, 4] {
        for task in [Task::Logistic, Task::Linear] {
            let table = match task {
                Task::Logistic => synthetic_separable(400, 5, SEED).map_err(e)?,
                Task::Linear => synthetic_linear(400, 5, SEED).map_err(e)?.0,
            };
            let (parts, _) = split_clients(&table, n, 1.0).map_err(e)?;
            let cfg = TrainConfig {
                task,
                gamma: 1.0,
                iterations: 50,
                batch: 20,
                seed: SEED,
                noise: NoiseParams::disabled(),
                init: None,
            };
            let mut net = NetworkHandle::spawn(n, n - 1, SEED).map_err(e)?;
            let dec = train(&mut net, Execution::default(), &parts, &cfg).map_err(e)?;
            let cen = centralized_baseline(&parts, &cfg).map_err(e)?;
            ensure(dec.trace.len() == 51 && cen.len() == 51, || "trace length".into())?;
            for (d, c) in dec.trace.iter().zip(&cen) {
                let gap = d.weights.iter().zip(&c.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                ensure(gap <= 1e-6, || format!("N={n} {task:?}: iteration {} differs by {gap:e}", d.iteration))?;
                worst = worst.max(gap);
            }
        }
    }
    Ok(format!("N ∈ {{2, 4}} × {{logistic, linear}}, 50 iterations, max gap {worst:.2e}"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn final_test_metric(name: &str, multiplier: f64) -> Result<(f64, f64), String> {
    let mut cfg = ExperimentConfig::load(configs_dir().join(name)).map_err(e)?;
    cfg.noise_multiplier = multiplier;
    let options = NetworkOptions { digests: false, retain_payloads: false };
    let (res, _) = run_experiment(&cfg, Execution::default(), options).map_err(e)?;
    let [dec, cen] = res.final_metrics(cfg.task).map_err(e)?;
    Ok((dec.1.ok_or("no test split")?, cen.1.ok_or("no test split")?))
}

fn c9_trend() -> Outcome {
    let mults = [1e-9, 10.0, 100.0];
    let acc: Vec<(f64, f64)> = mults.iter().map(|&m| final_test_metric("separable.toml", m)).collect::<Result<_, _>>()?;
    let err: Vec<(f64, f64)> = mults.iter().map(|&m| final_test_metric("linear.toml", m)).collect::<Result<_, _>>()?;
    let a: Vec<f64> = acc.iter().map(|x| x.0).collect();
    let r: Vec<f64> = err.iter().map(|x| x.0).collect();
    ensure(a[0] > a[1] && a[1] > a[2], || format!("accuracy not strictly decreasing: {a:?}"))?;
    ensure((a[0] - acc[0].1).abs() <= 0.02, || format!("accuracy {} vs centralized {}", a[0], acc[0].1))?;
    ensure(a[2] <= 0.6, || format!("accuracy at 100× is {}", a[2]))?;
    ensure(r[0] < r[1] && r[1] < r[2], || format!("relative error not strictly increasing: {r:?}"))?;
    ensure((r[0] - err[0].1).abs() <= 0.02, || format!("e_rel {} vs centralized {}", r[0], err[0].1))?;
    Ok(format!("accuracy {:.3} > {:.3} > {:.3}; e_rel {:.3e} < {:.3e} < {:.3e}", a[0], a[1], a[2], r[0], r[1], r[2]))
}

fn c10_perturbation() -> Outcome {
    // Same formula, coded separately: c·√(T+1)·(r + tT)·κ/λ·2^−52.
    let independent = |c: f64, t_deg: usize, t: f64, r: f64, kappa: f64, lambda: f64| {
        let td = t_deg as f64;
        c * (td + 1.0).sqrt() * (r + t * td) * (kappa / lambda) * 2f64.powi(-52)
    };
    let mut r = rng::derive(SEED, &[10]);
    let (trials, mut within) = (10_000usize, 0usize);
    for _ in 0..trials {
        let n = r.random_range(2..=8);
        let t_deg = n - 1;
        let trunc = r.random_range(3.0..20.0);
        let sigma_s = 1.0 / (t_deg as f64).sqrt();
        let r_bound = 1.0;
        let info = vandermonde_info(&roots_of_unity(n).map_err(e)?, t_deg).map_err(e)?;
        let terms = r.random_range(1..=4);
        let a: Vec<f64> = (0..terms).map(|_| r.random_range(-1.0..1.0)).collect();
        let c: f64 = a.iter().map(|v| v.abs()).sum();
        let inputs = PerturbationBoundInputs {
            c,
            degree: t_deg,
            t: trunc,
            r: r_bound,
            kappa_g: info.condition_number,
            lambda_min: info.min_singular,
            precision_bits: 52,
        };
        let bound = perturbation_bound(&inputs).map_err(e)?;
        let want = independent(c, t_deg, trunc, r_bound, info.condition_number, info.min_singular);
        ensure(bound == want, || format!("formula {bound:e} vs independent {want:e}"))?;

        let xs: Vec<f64> = (0..terms).map(|_| r.random_range(-r_bound..r_bound)).collect();
        let mut combo = vec![ComplexMatrix::zeros(1, 1); n];
        for (&al, &x) in a.iter().zip(&xs) {
            let p = make_share_polynomial("x", RealMatrix::scalar(x), t_deg, n, sigma_s, trunc, &mut r).map_err(e)?;
            for (acc, s) in combo.iter_mut().zip(evaluate_shares(&p)) {
                acc.axpy(Complex64::new(al, 0.0), s.value()).map_err(e)?;
            }
        }
        let shares: Vec<Share> = combo.into_iter().enumerate().map(|(i, v)| Share::new("y", i + 1, t_deg, n, v)).collect();
        let exact: f64 = a.iter().zip(&xs).map(|(u, v)| u * v).sum();
        let got = reconstruct(&shares).map_err(e)?.value.get(0, 0);
        within += usize::from((got - exact).abs() <= bound);
    }
    let frac = within as f64 / trials as f64;
    ensure(frac >= 0.99, || format!("only {within}/{trials} trials within the bound"))?;
    Ok(format!("formula exact; {within}/{trials} trials within bound"))
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let cfg = configs_dir().join("separable.toml");
    for out in ["a", "b"] {
        let o = Command::new(env!("CARGO_BIN_EXE_ampc"))
            .env_remove("AMPC_SEED")
            .args(["train", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .output()
            .map_err(e)?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    }
    for f in ["metrics_decentralized.csv", "metrics_centralized.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).map_err(e)?;
        let b = std::fs::read(dir.path().join("b").join(f)).map_err(e)?;
        ensure(a == b, || format!("{f} differs between runs"))?;
    }
    Ok("two runs, byte-identical metrics CSVs".into())
}

fn report(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = f();
    let took = start.elapsed();
    let res = match (res, limit) {
        (Ok(_), Some(l)) if took > l => Err(format!("took {:.1} s, limit {} s", took.as_secs_f64(), l.as_secs())),
        (r, _) => r,
    };
    let (tag, detail) = match &res {
        Ok(d) => ("PASS", d.as_str()),
        Err(d) => ("FAIL", d.as_str()),
    };
    println!("{tag} [{id:>2}] {name}: {detail} ({:.2} s)", took.as_secs_f64());
    res.is_ok()
}

fn main() {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let corpora = corpus();
    let cases = calibration_cases();
    let with_cases = |f: fn(&[CalibCase]) -> Outcome| -> Outcome { f(cases.as_ref().map_err(Clone::clone)?) };

    let results = [
        report(1, "reconstruction exactness", secs(10), || c1_reconstruction(&corpora)),
        report(2, "collusion underdetermination", secs(10), || c2_underdetermination(&corpora)),
        report(3, "Beaver multiplication", secs(30), c3_beaver),
        report(4, "PrivateMul averaging identity", secs(30), c4_private_mul),
        report(5, "calibration", secs(60), || with_cases(c5_calibration)),
        report(6, "σ_s·√T = σ", None, || with_cases(c6_sigma_split)),
        report(7, "privacy audit", secs(60), || with_cases(c7_audit)),
        report(8, "lockstep training equivalence", secs(120), c8_lockstep),
        report(9, "noise trend", secs(300), c9_trend),
        report(10, "perturbation bound", secs(30), c10_perturbation),
        report(11, "determinism", None, c11_determinism),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::{AmpcError, Result};
use crate::exec::Execution;
use crate::mpc::{add_constant, open_to_all, provision_triples, scale_share, share_secrets, sub_shares, NoiseParams, ShareJob};
use crate::network::{NetworkHandle, Party, Tag};
use crate::numerics::{ComplexMatrix, RealMatrix};
use crate::rng::StreamRng;
use crate::sharing::{reconstruct, Share};

use super::data::Dataset;
use super::metrics::{accuracy, predict, relative_error};
use super::private_mul::{private_mul, private_mul_triple_dims};
use super::schedule::BatchSchedule;

/// Stream label client 1 uses to draw w⁽⁰⁾.
pub(crate) const INIT_LABEL: &str = "init-weights";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Logistic,
    Linear,
}

impl Task {
    /// The design matrix: unchanged for logistic, [1, X] for linear.
    pub fn design(self, x: &RealMatrix) -> RealMatrix {
        match self {
            Task::Logistic => x.clone(),
            Task::Linear => RealMatrix::from_fn(x.rows(), x.cols() + 1, |r, c| if c == 0 { 1.0 } else { x.get(r, c - 1) }),
        }
    }

    /// Weight count for `features` input columns.
    pub fn n_weights(self, features: usize) -> usize {
        match self {
            Task::Logistic => features,
            Task::Linear => features + 1,
        }
    }

    /// Accuracy for logistic, relative error for linear.
    pub fn metric(self, w: &[f64], x: &RealMatrix, y: &[f64]) -> Result<f64> {
        let xd = self.design(x);
        match self {
            Task::Logistic => accuracy(w, &xd, y),
            Task::Linear => relative_error(y, &predict(&xd, w)),
        }
    }

    pub fn metric_name(self) -> &'static str {
        match self {
            Task::Logistic => "accuracy",
            Task::Linear => "relative_error",
        }
    }

    /// Residual e = ĝ(p) − y (logistic) or p − y (linear) for predictions p.
    pub(crate) fn residual(self, p: f64, y: f64) -> f64 {
        match self {
            Task::Logistic => super::metrics::sigmoid_approx(p) - y,
            Task::Linear => p - y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub task: Task,
    pub gamma: f64,
    pub iterations: usize,
    pub batch: usize,
    pub seed: u64,
    pub noise: NoiseParams,
    /// Fixed w⁽⁰⁾ instead of the random draw.
    pub init: Option<Vec<f64>>,
}

/// Weights after one iteration (0 is the initial draw).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub weights: Vec<f64>,
    /// max |reconstructed X^B·w − X^B·w| for this iteration's first product.
    pub product_residual: f64,
    /// Wall time since training started.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// w⁽ᴶ⁾ as reconstructed by client 1 in the final opening round.
    pub weights: Vec<f64>,
    /// Per-iteration weights, reconstructed out of band for monitoring.
    pub trace: Vec<IterationRecord>,
}

/// w⁽⁰⁾ ~ U[−0.01, 0.01]ⁿ.
pub fn initial_weights(rng: &mut StreamRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-0.01..=0.01)).collect()
}

pub(crate) fn validate(datasets: &[Dataset], cfg: &TrainConfig, n_clients: usize) -> Result<usize> {
    if datasets.len() != n_clients {
        return Err(AmpcError::invalid(format!("{} datasets for {n_clients} clients", datasets.len())));
    }
    let m = datasets[0].rows();
    let cols = datasets[0].cols();
    if datasets.iter().any(|d| d.rows() != m || d.cols() != cols) {
        return Err(AmpcError::Dataset("clients must hold equally shaped datasets".into()));
    }
    if let Some(w) = &cfg.init {
        let dim = cfg.task.n_weights(cols);
        if w.len() != dim || !w.iter().all(|v| v.is_finite()) {
            return Err(AmpcError::invalid(format!("initial weights need {dim} finite entries, got {}", w.len())));
        }
    }
    if !(cfg.gamma > 0.0 && cfg.gamma.is_finite()) {
        return Err(AmpcError::invalid(format!("learning rate must be positive, got {}", cfg.gamma)));
    }
    if cfg.batch == 0 || cfg.batch > m {
        return Err(AmpcError::invalid(format!("batch size must be in 1..={m}, got {}", cfg.batch)));
    }
    if cfg.task == Task::Logistic {
        if let Some(v) = datasets.iter().flat_map(|d| &d.labels).find(|&&v| v != 0.0 && v != 1.0) {
            return Err(AmpcError::Dataset(format!("logistic regression needs labels in {{0, 1}}, found {v}")));
        }
    }
    Ok(m)
}

fn reconstruct_vec(shares: &[Share]) -> Result<Vec<f64>> {
    Ok(reconstruct(shares)?.value.into_data())
}

/// Product shares grow with every chained multiplication; past the double
/// range the run cannot continue.
fn check_finite(shares: &[Share], it: usize, sigma_s: f64) -> Result<()> {
    if shares.iter().any(|s| !s.value().is_finite()) {
        return Err(AmpcError::NumericOverflow(format!(
            "iteration {}: share values left the double range (σ_s = {sigma_s})",
            it + 1
        )));
    }
    Ok(())
}

fn column(v: &[f64]) -> ComplexMatrix {
    RealMatrix::column(v.to_vec()).expect("finite labels").to_complex()
}

/// Collaborative training over the network: per iteration every client
/// shares a mini-batch, the clients compute shares of X^B·w and
/// (X^B)ᵀ·e with [`private_mul`], and update
/// [w]_k ← [w]_k − γ/(NB)·[(X^B)ᵀe]_k. Finally w⁽ᴶ⁾ is opened to all.
pub fn train(net: &mut NetworkHandle, exec: Execution, datasets: &[Dataset], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let n = net.n_clients();
    let m = validate(datasets, cfg, n)?;
    if cfg.seed != net.seed() {
        return Err(AmpcError::invalid(format!("config seed {} differs from network seed {}", cfg.seed, net.seed())));
    }
    let designs: Vec<RealMatrix> = datasets.iter().map(|d| cfg.task.design(&d.features)).collect();
    let dim = designs[0].cols();
    let schedule = BatchSchedule::new(cfg.seed, m, cfg.batch)?;
    let rows = n * cfg.batch;
    let step = cfg.gamma / rows as f64;

    let start = Instant::now();
    let w0 = match &cfg.init {
        Some(w) => w.clone(),
        None => initial_weights(&mut net.stream(Party::Client(1), INIT_LABEL)?, dim),
    };
    let job = ShareJob { owner: 1, label: "w0".into(), secret: column(&w0) };
    let mut w = share_secrets(net, exec, vec![job], cfg.noise, Tag::DataShare)?.remove(0);
    let mut trace = vec![IterationRecord { iteration: 0, weights: w0, product_residual: 0.0, elapsed: start.elapsed() }];

    for it in 0..cfg.iterations {
        let batches: Vec<(RealMatrix, Vec<f64>)> = (0..n)
            .map(|j| {
                let idx = schedule.indices(j + 1, it);
                (designs[j].select_rows(&idx), idx.iter().map(|&r| datasets[j].labels[r]).collect())
            })
            .collect();
        let mut jobs = Vec::with_capacity(2 * n);
        for (j, (x, y)) in batches.iter().enumerate() {
            jobs.push(ShareJob { owner: j + 1, label: format!("it{it}/X{}", j + 1), secret: x.to_complex() });
            jobs.push(ShareJob { owner: j + 1, label: format!("it{it}/y{}", j + 1), secret: column(y) });
        }
        let shared = share_secrets(net, exec, jobs, cfg.noise, Tag::DataShare)?;
        let stack = |off: usize, name: &str| -> Result<Vec<Share>> {
            (0..n)
                .map(|k| {
                    let parts: Vec<ComplexMatrix> = (0..n).map(|j| shared[2 * j + off][k].value().clone()).collect();
                    Ok(Share::new(format!("it{it}/{name}"), k + 1, net.degree(), n, ComplexMatrix::vstack(&parts)?))
                })
                .collect()
        };
        let xb = stack(0, "X")?;
        let yb = stack(1, "y")?;

        let dims = private_mul_triple_dims((rows, dim), (dim, 1), n)?;
        let triples = provision_triples(net, exec, &dims, cfg.noise)?;
        let xw = private_mul(net, exec, &format!("it{it}/Xw"), &xb, &w, triples, cfg.noise)?.shares;

        check_finite(&xw, it, cfg.noise.sigma_s)?;
        let plain_x = RealMatrix::vstack(&batches.iter().map(|b| b.0.clone()).collect::<Vec<_>>())?;
        let w_now = &trace.last().expect("w0 recorded").weights;
        let residual = reconstruct_vec(&xw)?
            .iter()
            .zip(predict(&plain_x, w_now))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);

        let e = xw
            .iter()
            .zip(&yb)
            .map(|(p, y)| {
                let g = match cfg.task {
                    Task::Logistic => add_constant(0.5, &scale_share(0.25, p)?),
                    Task::Linear => p.clone(),
                };
                sub_shares(&g, y)
            })
            .collect::<Result<Vec<_>>>()?;
        let xt: Vec<Share> = xb.iter().map(|s| s.with_value(format!("it{it}/Xt"), s.value().transpose())).collect();

        let dims = private_mul_triple_dims((dim, rows), (rows, 1), n)?;
        let triples = provision_triples(net, exec, &dims, cfg.noise)?;
        let grad = private_mul(net, exec, &format!("it{it}/Xte"), &xt, &e, triples, cfg.noise)?.shares;

        check_finite(&grad, it, cfg.noise.sigma_s)?;
        w = w
            .iter()
            .zip(&grad)
            .map(|(wk, gk)| sub_shares(wk, &scale_share(step, gk)?).map(|s| s.with_value("w", s.value().clone())))
            .collect::<Result<Vec<_>>>()?;
        trace.push(IterationRecord {
            iteration: it + 1,
            weights: reconstruct_vec(&w)?,
            product_residual: residual,
            elapsed: start.elapsed(),
        });
    }

    let opened = open_to_all(net, &w, "w/final")?;
    Ok(TrainOutcome { weights: opened[0].value.data().to_vec(), trace })
}

/// [`train`] for classification; labels must be 0 or 1.
pub fn train_logistic(net: &mut NetworkHandle, exec: Execution, datasets: &[Dataset], cfg: &TrainConfig) -> Result<TrainOutcome> {
    if cfg.task != Task::Logistic {
        return Err(AmpcError::invalid("train_logistic needs task = logistic"));
    }
    train(net, exec, datasets, cfg)
}

/// [`train`] for regression with an intercept column.
pub fn train_linear(net: &mut NetworkHandle, exec: Execution, datasets: &[Dataset], cfg: &TrainConfig) -> Result<TrainOutcome> {
    if cfg.task != Task::Linear {
        return Err(AmpcError::invalid("train_linear needs task = linear"));
    }
    train(net, exec, datasets, cfg)
}

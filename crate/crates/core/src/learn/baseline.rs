use std::time::Instant;

use crate::error::Result;
use crate::numerics::RealMatrix;
use crate::rng;

use super::data::Dataset;
use super::metrics::predict;
use super::schedule::BatchSchedule;
use super::train::{initial_weights, validate, IterationRecord, TrainConfig, INIT_LABEL};

/// Plaintext training on the pooled data with the same schedule, w⁽⁰⁾ and
/// update rule (ĝ for logistic) as [`super::train`]. Returns w⁽⁰⁾..w⁽ᴶ⁾.
pub fn centralized_baseline(datasets: &[Dataset], cfg: &TrainConfig) -> Result<Vec<IterationRecord>> {
    let n = datasets.len();
    let m = validate(datasets, cfg, n)?;
    let designs: Vec<RealMatrix> = datasets.iter().map(|d| cfg.task.design(&d.features)).collect();
    let dim = designs[0].cols();
    let schedule = BatchSchedule::new(cfg.seed, m, cfg.batch)?;
    let step = cfg.gamma / (n * cfg.batch) as f64;

    // Same stream the decentralized run's client 1 draws from.
    let start = Instant::now();
    let record = |iteration: usize, w: &[f64]| IterationRecord {
        iteration,
        weights: w.to_vec(),
        product_residual: 0.0,
        elapsed: start.elapsed(),
    };
    let mut r = rng::derive(cfg.seed, &[1, rng::label_hash(INIT_LABEL)]);
    let mut w = match &cfg.init {
        Some(w) => w.clone(),
        None => initial_weights(&mut r, dim),
    };
    let mut trace = vec![record(0, &w)];
    for it in 0..cfg.iterations {
        let mut parts = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n * cfg.batch);
        for (j, (x, d)) in designs.iter().zip(datasets).enumerate() {
            let idx = schedule.indices(j + 1, it);
            parts.push(x.select_rows(&idx));
            y.extend(idx.iter().map(|&r| d.labels[r]));
        }
        let xb = RealMatrix::vstack(&parts)?;
        let e: Vec<f64> = predict(&xb, &w).iter().zip(&y).map(|(&p, &t)| cfg.task.residual(p, t)).collect();
        let grad = xb.transpose().matmul(&RealMatrix::column(e)?)?;
        for (wi, g) in w.iter_mut().zip(grad.data()) {
            *wi -= step * g;
        }
        trace.push(record(it + 1, &w));
    }
    Ok(trace)
}

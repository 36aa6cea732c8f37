use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::numerics::RealMatrix;
use crate::rng;

use super::data::LabeledTable;

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Two Gaussian classes split by a random hyperplane through the origin,
/// with a margin of 0.25 (in units of the feature scale).
pub fn synthetic_separable(rows: usize, features: usize, seed: u64) -> Result<LabeledTable> {
    let mut r = rng::derive(seed, &[rng::label_hash("separable")]);
    let mut w: Vec<f64> = (0..features).map(|_| StandardNormal.sample(&mut r)).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);
    let mut data = Vec::with_capacity(rows * features);
    let mut labels = Vec::with_capacity(rows);
    while labels.len() < rows {
        let x: Vec<f64> = (0..features).map(|_| StandardNormal.sample(&mut r)).collect();
        let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        if s.abs() < 0.25 {
            continue;
        }
        labels.push(if s > 0.0 { 1.0 } else { 0.0 });
        data.extend(x);
    }
    LabeledTable::new(names(features), RealMatrix::new(rows, features, data)?, labels)
}

/// y = X·w* + b with features uniform on [−1, 1]; returns the table and
/// (b, w*). Coefficients are small enough that |y| < 1.
pub fn synthetic_linear(rows: usize, features: usize, seed: u64) -> Result<(LabeledTable, Vec<f64>)> {
    let mut r = rng::derive(seed, &[rng::label_hash("linear")]);
    let span = 0.8 / (features as f64 + 1.0);
    let coef: Vec<f64> = (0..=features).map(|_| r.random_range(-span..span)).collect();
    let x = RealMatrix::from_fn(rows, features, |_, _| r.random_range(-1.0..1.0));
    let y = (0..rows).map(|i| coef[0] + x.row(i).iter().zip(&coef[1..]).map(|(a, b)| a * b).sum::<f64>()).collect();
    Ok((LabeledTable::new(names(features), x, y)?, coef))
}

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{singular_values, ComplexMatrix};
use crate::error::{AmpcError, Result};

/// A public evaluation point ω_i = exp(2π√−1·i/N), `index` in `1..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub index: usize,
    pub n_points: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone)]
pub struct VandermondeInfo {
    pub matrix: ComplexMatrix,
    pub condition_number: f64,
    pub min_singular: f64,
    pub max_singular: f64,
}

/// exp(2π√−1·j/n), exact at quarter turns.
fn unit(j: usize, n: usize) -> Complex64 {
    let j = j % n;
    if (4 * j).is_multiple_of(n) {
        return match 4 * j / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = TAU * j as f64 / n as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// ω_i^k for the `n`-point set, reduced mod `n` so large powers stay exact.
pub fn root_power(i: usize, k: usize, n: usize) -> Complex64 {
    unit((i % n) * (k % n) % n, n)
}

pub fn roots_of_unity(n: usize) -> Result<Vec<EvalPoint>> {
    if n == 0 {
        return Err(AmpcError::invalid("roots_of_unity: N must be at least 1"));
    }
    Ok((1..=n).map(|i| EvalPoint { index: i, n_points: n, value: unit(i, n) }).collect())
}

/// Builds G with rows [1, ω, …, ω^T] for the T+1 given points and reports
/// its conditioning.
pub fn vandermonde_info(points: &[EvalPoint], t: usize) -> Result<VandermondeInfo> {
    if points.len() != t + 1 {
        return Err(AmpcError::invalid(format!(
            "vandermonde_info: need T+1 = {} points, got {}",
            t + 1,
            points.len()
        )));
    }
    for (a, p) in points.iter().enumerate() {
        if points[..a].iter().any(|q| q.index == p.index || (q.value - p.value).norm() < 1e-12) {
            return Err(AmpcError::SingularMatrix(format!("duplicate evaluation point {}", p.index)));
        }
    }
    let matrix = ComplexMatrix::from_fn(t + 1, t + 1, |r, c| {
        let p = points[r];
        root_power(p.index, c, p.n_points)
    });
    let sv = singular_values(&matrix);
    let max_singular = sv[0];
    let min_singular = *sv.last().expect("non-empty");
    if min_singular <= 1e-13 * max_singular {
        return Err(AmpcError::SingularMatrix("numerically singular Vandermonde matrix".into()));
    }
    Ok(VandermondeInfo {
        matrix,
        condition_number: max_singular / min_singular,
        min_singular,
        max_singular,
    })
}

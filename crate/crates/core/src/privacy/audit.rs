use serde::Serialize;

use crate::error::Result;
use crate::exec::Execution;
use crate::numerics::{sample_truncated_gaussian, RealMatrix};
use crate::rng;
use crate::sharing::make_share_polynomial;

/// Fixed shard count: results do not depend on the thread count.
pub const AUDIT_SHARDS: usize = 64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditResult {
    pub n_samples: usize,
    pub violations: usize,
    pub empirical: f64,
    /// Binomial standard error √(p(1−p)/n).
    pub stderr: f64,
}

impl AuditResult {
    fn from_counts(violations: usize, n_samples: usize) -> Self {
        let p = violations as f64 / n_samples as f64;
        Self { n_samples, violations, empirical: p, stderr: (p * (1.0 - p) / n_samples as f64).sqrt() }
    }

    /// Empirical violation rate within three standard errors of δ.
    pub fn passes(&self, delta: f64) -> bool {
        self.empirical <= delta + 3.0 * self.stderr
    }
}

/// y violates ε when it falls outside Δ/2 ± σ²ε/Δ.
fn violates(y: f64, sigma: f64, epsilon: f64, delta_s: f64) -> bool {
    let half = sigma * sigma * epsilon / delta_s;
    y < delta_s / 2.0 - half || y > delta_s / 2.0 + half
}

fn shard_sizes(n: usize) -> impl Fn(usize) -> usize {
    move |s| n / AUDIT_SHARDS + usize::from(s < n % AUDIT_SHARDS)
}

/// Monte-Carlo estimate of the violation probability of the idealized
/// truncated Gaussian mechanism (noise drawn directly from TN(0, σ², [−t, t])).
pub fn audit_mechanism(
    sigma: f64,
    delta_s: f64,
    t: f64,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<AuditResult> {
    let size = shard_sizes(n_samples);
    let counts = exec.try_map_range(AUDIT_SHARDS, |s| {
        let mut r = rng::derive(seed, &[rng::label_hash("audit"), s as u64]);
        let mut v = 0usize;
        for _ in 0..size(s) {
            let y = sample_truncated_gaussian(sigma, t, &mut r)?;
            v += usize::from(violates(y, sigma, epsilon, delta_s));
        }
        Ok::<_, crate::AmpcError>(v)
    })?;
    Ok(AuditResult::from_counts(counts.iter().sum(), n_samples))
}

/// Same test on noise realized by the sharing code itself: each sample is
/// the real part of the combined noise Ñ of a freshly drawn 1×1 share
/// polynomial (jointly truncated at all N points), at a rotating
/// evaluation point. `sigma` is the target mechanism σ = σ_s·√T.
#[allow(clippy::too_many_arguments)]
pub fn audit_protocol_noise(
    sigma_s: f64,
    degree: usize,
    n_points: usize,
    delta_s: f64,
    t: f64,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<AuditResult> {
    let sigma = sigma_s * (degree as f64).sqrt();
    let size = shard_sizes(n_samples);
    let counts = exec.try_map_range(AUDIT_SHARDS, |s| {
        let mut r = rng::derive(seed, &[rng::label_hash("audit-protocol"), s as u64]);
        let mut v = 0usize;
        for k in 0..size(s) {
            let p = make_share_polynomial("audit", RealMatrix::zeros(1, 1), degree, n_points, sigma_s, t, &mut r)?;
            let y = p.combined_noise(1 + k % n_points).data()[0].re;
            v += usize::from(violates(y, sigma, epsilon, delta_s));
        }
        Ok::<_, crate::AmpcError>(v)
    })?;
    Ok(AuditResult::from_counts(counts.iter().sum(), n_samples))
}

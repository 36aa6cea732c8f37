use serde::{Deserialize, Serialize};

use super::objective::{alpha_upper, b_objective};
use crate::error::{AmpcError, Result};

const BISECT_REL_TOL: f64 = 1e-12;
const BISECT_MAX_ITERS: usize = 200;

/// A calibrated per-release budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
    pub t: f64,
    pub delta_sensitivity: f64,
    pub alpha_star: f64,
    pub sigma: f64,
    pub sigma_s: f64,
    #[serde(rename = "T")]
    pub degree: usize,
    pub feasible: bool,
    /// B stays below δ on the whole range: α* sits at the lower search end.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl PrivacyBudget {
    /// Noise level attained at α*: B(α*).
    pub fn attained_violation(&self) -> Result<f64> {
        b_objective(self.alpha_star, self.epsilon, self.t, self.delta_sensitivity)
    }
}

/// Smallest noise meeting (ε, δ): the root α* of B(α) = δ, by bisection on
/// (α_hi·1e-12, α_hi) with α_hi = √(2t/Δ − 1)·(1 − 1e-12). The returned α*
/// always satisfies B(α*) ≤ δ. Then σ = α*Δ/√(2ε) and σ_s = σ/√T.
pub fn calibrate(epsilon: f64, delta: f64, t: f64, delta_s: f64, degree: usize) -> Result<PrivacyBudget> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(AmpcError::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AmpcError::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if degree == 0 {
        return Err(AmpcError::invalid("T must be at least 1"));
    }
    let alpha_hi = alpha_upper(t, delta_s)? * (1.0 - 1e-12);
    let alpha_lo = alpha_hi * 1e-12;
    let b = |a: f64| b_objective(a, epsilon, t, delta_s);

    if b(alpha_hi)? > delta {
        return Err(AmpcError::InfeasibleBudget(format!(
            "B(α) > δ even at the largest admissible α = {alpha_hi:.6e}; increase the truncation width t or relax ε/δ"
        )));
    }
    let (alpha_star, degenerate) = if b(alpha_lo)? <= delta {
        (alpha_lo, true)
    } else {
        // Invariant: B(lo) > δ ≥ B(hi). Geometric midpoints: the bracket
        // spans twelve decades at the start.
        let (mut lo, mut hi) = (alpha_lo, alpha_hi);
        for _ in 0..BISECT_MAX_ITERS {
            if hi - lo <= BISECT_REL_TOL * hi {
                break;
            }
            let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if b(mid)? <= delta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (hi, false)
    };
    let sigma = alpha_star * delta_s / (2.0 * epsilon).sqrt();
    Ok(PrivacyBudget {
        epsilon,
        delta,
        t,
        delta_sensitivity: delta_s,
        alpha_star,
        sigma,
        sigma_s: sigma / (degree as f64).sqrt(),
        degree,
        feasible: true,
        degenerate,
    })
}

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{AmpcError, Result};

/// Draws per scalar before the truncated sampler gives up.
pub const SAMPLING_RETRY_CAP: usize = 10_000;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Φ(x), via `erfc` so the lower tail keeps full relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Q(x) = 1 − Φ(x), computed without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// ln Q(x). Switches to the asymptotic Mills-ratio series once `Q` would
/// lose precision to underflow.
pub fn ln_std_normal_sf(x: f64) -> f64 {
    if x < 30.0 {
        return std_normal_sf(x).ln();
    }
    let x2 = x * x;
    let inv = 1.0 / x2;
    let series = 1.0 - inv * (1.0 - inv * (3.0 - inv * (15.0 - inv * 105.0)));
    -0.5 * x2 - x.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
}

/// CDF of TN(0, σ²; [−t, t]) at `x`.
pub fn truncated_cdf(x: f64, sigma: f64, t: f64) -> f64 {
    if x <= -t {
        return 0.0;
    }
    if x >= t {
        return 1.0;
    }
    let lo = std_normal_cdf(-t / sigma);
    let mass = std_normal_cdf(t / sigma) - lo;
    ((std_normal_cdf(x / sigma) - lo) / mass).clamp(0.0, 1.0)
}

pub fn sample_normal<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

/// One draw from TN(0, σ²; [−t, t]) by rejection from N(0, σ²).
pub fn sample_truncated_gaussian<R: Rng + ?Sized>(sigma: f64, t: f64, rng: &mut R) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(AmpcError::invalid(format!("sigma must be positive and finite, got {sigma}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(AmpcError::invalid(format!("truncation t must be positive and finite, got {t}")));
    }
    for _ in 0..SAMPLING_RETRY_CAP {
        let y = sample_normal(sigma, rng);
        if y.abs() <= t {
            return Ok(y);
        }
    }
    Err(AmpcError::SamplingFailure { attempts: SAMPLING_RETRY_CAP, rejection_rate: 1.0 })
}

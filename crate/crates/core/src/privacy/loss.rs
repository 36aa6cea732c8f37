use crate::error::{AmpcError, Result};

/// How a one-record change can move a client's secret.
#[derive(Debug, Clone, Copy)]
pub struct NeighborSpec {
    /// Largest L2 norm of any single record.
    pub record_bound: f64,
    /// User-supplied Δ; wins over the derived value.
    pub delta_override: Option<f64>,
}

/// Δ = 2·record_bound: the worst case replaces a record by its negation.
pub fn compute_sensitivity(spec: &NeighborSpec) -> Result<f64> {
    if let Some(d) = spec.delta_override {
        if !(d > 0.0 && d.is_finite()) {
            return Err(AmpcError::invalid(format!("sensitivity override must be positive, got {d}")));
        }
        return Ok(d);
    }
    if !(spec.record_bound > 0.0 && spec.record_bound.is_finite()) {
        return Err(AmpcError::invalid(format!("record bound must be positive, got {}", spec.record_bound)));
    }
    Ok(2.0 * spec.record_bound)
}

/// |(Δ² − 2yΔ)/(2σ²)| on the support [−t+Δ, t], zero outside it.
pub fn privacy_loss_scalar(y: f64, sigma: f64, delta_s: f64, t: f64) -> f64 {
    if y < -t + delta_s || y > t {
        return 0.0;
    }
    ((delta_s * delta_s - 2.0 * y * delta_s) / (2.0 * sigma * sigma)).abs()
}

/// Loss of observing `s` under secrets differing by `w`:
/// |‖s‖² − ‖s − w‖²| / (2σ²).
pub fn vector_privacy_loss(s: &[f64], w: &[f64], sigma: f64) -> f64 {
    let a: f64 = s.iter().map(|v| v * v).sum();
    let b: f64 = s.iter().zip(w).map(|(x, y)| (x - y) * (x - y)).sum();
    (a - b).abs() / (2.0 * sigma * sigma)
}

use crate::error::{AmpcError, Result};

/// Mantissa bits of an IEEE double; the default precision for bound reports.
pub const DEFAULT_PRECISION_BITS: u32 = 52;

/// Inputs of the worst-case reconstruction perturbation bound.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationBoundInputs {
    /// Σ_l |a_l| over the linear combination being reconstructed.
    pub c: f64,
    pub degree: usize,
    pub t: f64,
    /// Bound on the absolute value of the secrets.
    pub r: f64,
    pub kappa_g: f64,
    pub lambda_min: f64,
    pub precision_bits: u32,
}

/// c·√(T+1)·(r + tT)·(κ_G/λ_min)·2^(−b_m).
pub fn perturbation_bound(inp: &PerturbationBoundInputs) -> Result<f64> {
    let positive = [inp.c, inp.t, inp.r, inp.kappa_g, inp.lambda_min];
    if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || inp.degree == 0 {
        return Err(AmpcError::invalid("perturbation bound inputs must all be positive"));
    }
    let t_deg = inp.degree as f64;
    if inp.t * t_deg + inp.r < 1.0 {
        return Err(AmpcError::invalid("perturbation bound requires tT + r >= 1"));
    }
    let scale = (-f64::from(inp.precision_bits)).exp2();
    Ok(inp.c * (t_deg + 1.0).sqrt() * (inp.r + inp.t * t_deg) * (inp.kappa_g / inp.lambda_min) * scale)
}

use crate::error::{AmpcError, Result};
use crate::numerics::{ln_std_normal_sf, std_normal_sf};

/// B(α) together with its logarithm and the logarithm of its complement.
///
/// B saturates at 1 for small α and is tiny for large α, so a monotonicity
/// check on B alone loses information in double precision; the two logs
/// keep it in both regimes.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveTerms {
    pub b: f64,
    pub ln_b: f64,
    pub ln_one_minus_b: f64,
}

/// √(2t/Δ − 1), the upper end of the admissible α range.
pub fn alpha_upper(t: f64, delta_s: f64) -> Result<f64> {
    check_positive(&[("t", t), ("sensitivity", delta_s)])?;
    let r = 2.0 * t / delta_s;
    if r <= 1.0 {
        return Err(AmpcError::InfeasibleBudget(format!(
            "truncation width too small: need 2t/Δ > 1, got 2·{t}/{delta_s} = {r}"
        )));
    }
    Ok((r - 1.0).sqrt())
}

fn check_positive(vals: &[(&str, f64)]) -> Result<()> {
    for (name, v) in vals {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(AmpcError::invalid(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

/// ln(e^x + e^y − 2e^z) without overflow or underflow.
fn log_combo(x: f64, y: f64, z: f64) -> f64 {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let v = (x - m).exp() + (y - m).exp() - 2.0 * (z - m).exp();
    if v > 0.0 {
        m + v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Evaluates B(α) for ε, t, Δ in a cancellation-free form.
///
/// With a = √(ε/2)(α + 1/α), b = √(ε/2)(1/α − α), c = t√(2ε)/(αΔ) and
/// Q = 1 − Φ:
///   B     = [Q(a) + Q(−b) − 2Q(c)] / (1 − 2Q(c))
///   1 − B = [Φ(a) − Φ(b)] / (1 − 2Q(c))
pub fn b_objective_terms(alpha: f64, epsilon: f64, t: f64, delta_s: f64) -> Result<ObjectiveTerms> {
    check_positive(&[("epsilon", epsilon), ("alpha", alpha)])?;
    let hi = alpha_upper(t, delta_s)?;
    if alpha >= hi {
        return Err(AmpcError::invalid(format!("alpha {alpha} outside (0, {hi})")));
    }
    let k = (epsilon / 2.0).sqrt();
    let a = k * (alpha + 1.0 / alpha);
    let b = k * (1.0 / alpha - alpha);
    let c = t * (2.0 * epsilon).sqrt() / (alpha * delta_s);

    let qa = std_normal_sf(a);
    let qmb = std_normal_sf(-b);
    let qc = std_normal_sf(c);
    let h = libm::erf(c * std::f64::consts::FRAC_1_SQRT_2);
    let ln_h = if qc < 0.25 { (-2.0 * qc).ln_1p() } else { h.ln() };

    let num = (qa - qc) + (qmb - qc);
    let b_val = (num / h).clamp(0.0, 1.0);
    let ln_num = log_combo(ln_std_normal_sf(a), ln_std_normal_sf(-b), ln_std_normal_sf(c));
    let ln_b = (ln_num - ln_h).min(0.0);

    let ln_g = if b > 0.0 {
        // Φ(a) − Φ(b) = Q(b) − Q(a), both tails.
        let (la, lb) = (ln_std_normal_sf(a), ln_std_normal_sf(b));
        lb + (-(la - lb).exp()).ln_1p()
    } else {
        (-qa - qmb).ln_1p()
    };
    let ln_one_minus_b = (ln_g - ln_h).min(0.0);
    Ok(ObjectiveTerms { b: b_val, ln_b, ln_one_minus_b })
}

pub fn b_objective(alpha: f64, epsilon: f64, t: f64, delta_s: f64) -> Result<f64> {
    Ok(b_objective_terms(alpha, epsilon, t, delta_s)?.b)
}

/// True if B strictly decreases from `a` to `b` (α_a < α_b). Compares in
/// whichever representation is accurate: ln B while B ≤ 1/2, ln(1 − B)
/// above it (there B is within rounding of 1).
pub fn strictly_decreasing(a: &ObjectiveTerms, b: &ObjectiveTerms) -> bool {
    match (a.b <= 0.5, b.b <= 0.5) {
        (true, true) => b.ln_b < a.ln_b,
        (false, false) => b.ln_one_minus_b > a.ln_one_minus_b,
        (false, true) => true,
        (true, false) => false,
    }
}

/// Probability mass of the ε-violating regions under TN(0, σ²; [−t, t]);
/// B evaluated at α = σ√(2ε)/Δ.
pub fn analytic_violation_prob(sigma: f64, epsilon: f64, delta_s: f64, t: f64) -> Result<f64> {
    check_positive(&[("sigma", sigma), ("epsilon", epsilon)])?;
    let upper = (t * delta_s / epsilon - delta_s * delta_s / (2.0 * epsilon)).sqrt();
    if upper.is_nan() || sigma >= upper {
        return Err(AmpcError::invalid(format!("sigma {sigma} outside (0, {upper})")));
    }
    b_objective(sigma * (2.0 * epsilon).sqrt() / delta_s, epsilon, t, delta_s)
}

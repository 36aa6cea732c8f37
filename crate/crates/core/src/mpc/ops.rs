use crate::error::{AmpcError, Result};
use crate::sharing::Share;

fn compatible(a: &Share, b: &Share) -> Result<()> {
    if a.eval_index() != b.eval_index() || a.degree() != b.degree() || a.n_points() != b.n_points() {
        return Err(AmpcError::invalid(format!(
            "shares at ω_{} (T={}, N={}) and ω_{} (T={}, N={}) cannot be combined",
            a.eval_index(),
            a.degree(),
            a.n_points(),
            b.eval_index(),
            b.degree(),
            b.n_points()
        )));
    }
    Ok(())
}

/// [U₁]_i + [U₂]_i: a share of U₁ + U₂ at the same point.
pub fn add_shares(a: &Share, b: &Share) -> Result<Share> {
    compatible(a, b)?;
    Ok(a.with_value(format!("{}+{}", a.secret_id(), b.secret_id()), a.value().add(b.value())?))
}

pub fn sub_shares(a: &Share, b: &Share) -> Result<Share> {
    compatible(a, b)?;
    Ok(a.with_value(format!("{}-{}", a.secret_id(), b.secret_id()), a.value().sub(b.value())?))
}

/// l·[U]_i: a share of l·U.
pub fn scale_share(l: f64, a: &Share) -> Result<Share> {
    if !l.is_finite() {
        return Err(AmpcError::invalid("scale factor must be finite"));
    }
    Ok(a.with_value(a.secret_id().to_string(), a.value().scale(l)))
}

/// [U]_i + c: a share of U + c for a public constant `c`.
pub fn add_constant(c: f64, a: &Share) -> Share {
    a.with_value(a.secret_id().to_string(), a.value().shift(c))
}

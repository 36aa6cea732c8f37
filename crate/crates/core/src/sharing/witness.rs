use std::borrow::Borrow;

use super::Share;
use crate::error::{AmpcError, Result};
use crate::numerics::{root_power, solve, Complex64, ComplexMatrix, RealMatrix};

/// A degree-T polynomial with complex coefficients, consistent with a set of
/// `T` observed shares.
#[derive(Debug, Clone)]
pub struct WitnessPolynomial {
    pub constant: ComplexMatrix,
    pub coeffs: Vec<ComplexMatrix>,
    pub n_points: usize,
}

impl WitnessPolynomial {
    pub fn evaluate(&self, index: usize) -> ComplexMatrix {
        let mut v = self.constant.clone();
        for (k, c) in self.coeffs.iter().enumerate() {
            v.axpy(root_power(index, k + 1, self.n_points), c).expect("shapes agree");
        }
        v
    }
}

/// Shows that `T` shares say nothing about the secret: fixes the constant
/// term to `reference + 1` (every entry shifted by one, so at least 1.0 away
/// in Frobenius norm) and solves the remaining T×T system
/// Σ_k ω_i^k z_k = share_i − z₀ for the other coefficients.
pub fn underdetermination_witness<S: Borrow<Share>>(shares: &[S], reference: &RealMatrix) -> Result<WitnessPolynomial> {
    let first = shares.first().ok_or_else(|| AmpcError::invalid("witness needs at least one share"))?.borrow();
    let (degree, n_points, shape) = (first.degree(), first.n_points(), first.shape());
    if shares.len() != degree {
        return Err(AmpcError::invalid(format!("witness needs exactly T = {degree} shares, got {}", shares.len())));
    }
    if reference.shape() != shape {
        return Err(AmpcError::invalid("reference shape differs from shares"));
    }
    let mut seen = Vec::with_capacity(degree);
    for s in shares {
        let s = s.borrow();
        if s.degree() != degree || s.n_points() != n_points || s.shape() != shape {
            return Err(AmpcError::invalid("shares disagree on (T, N, shape)"));
        }
        if seen.contains(&s.eval_index()) {
            return Err(AmpcError::invalid("witness shares must have distinct indices"));
        }
        seen.push(s.eval_index());
    }

    let constant = reference.map(|v| v + 1.0).to_complex();
    let (rows, cols) = shape;
    let entries = rows * cols;
    let a = ComplexMatrix::from_fn(degree, degree, |i, k| root_power(seen[i], k + 1, n_points));
    let rhs = ComplexMatrix::from_fn(degree, entries, |i, e| {
        shares[i].borrow().value().data()[e] - constant.data()[e]
    });
    let z = solve(&a, &rhs)?;
    let coeffs = (0..degree)
        .map(|k| ComplexMatrix::new(rows, cols, (0..entries).map(|e| z.get(k, e)).collect::<Vec<Complex64>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessPolynomial { constant, coeffs, n_points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sharing::{evaluate_shares, make_share_polynomial};

    #[test]
    fn one_share_example() {
        let s = Share::new("x", 1, 1, 2, RealMatrix::scalar(2.5).to_complex());
        let w = underdetermination_witness(&[s], &RealMatrix::scalar(3.0)).unwrap();
        assert_eq!(w.constant.re(), RealMatrix::scalar(4.0));
        assert!((w.coeffs[0].get(0, 0) - Complex64::new(1.5, 0.0)).norm() < 1e-15);
        assert!((w.evaluate(1).get(0, 0) - Complex64::new(2.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reproduces_observed_shares() {
        let mut r = rng::derive(31, &[]);
        let secret = RealMatrix::from_fn(2, 2, |a, b| (a + 2 * b) as f64);
        let p = make_share_polynomial("x", secret.clone(), 3, 4, 1.0, 50.0, &mut r).unwrap();
        let shares = evaluate_shares(&p);
        let seen = &shares[1..];
        let w = underdetermination_witness(seen, &secret).unwrap();
        for s in seen {
            assert!(w.evaluate(s.eval_index()).max_abs_diff(s.value()) < 1e-9);
        }
        let gap = w.constant.re().sub(&secret).unwrap().frobenius();
        assert!(gap >= 1.0);
    }

    #[test]
    fn wrong_count_rejected() {
        let s = Share::new("x", 1, 2, 3, RealMatrix::scalar(1.0).to_complex());
        assert!(underdetermination_witness(&[s], &RealMatrix::scalar(0.0)).is_err());
    }
}

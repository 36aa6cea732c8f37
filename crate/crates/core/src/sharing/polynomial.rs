use rand::Rng;

use super::Share;
use crate::error::{AmpcError, Result};
use crate::numerics::{root_power, sample_normal, Complex64, ComplexMatrix, RealMatrix};

/// Full joint redraws of the noise coefficients before giving up.
pub const RESAMPLE_CAP: usize = 1_000;

/// S(s) = X + Σ_{k=1..T} s^k N_k, with the combined noise at every evaluation
/// point truncated to `[-t, t]` in both real and imaginary parts.
///
/// The secret may be complex: re-sharing a product of two shares needs that.
/// Noise coefficients are always real.
#[derive(Debug, Clone)]
pub struct SharePolynomial {
    secret_id: String,
    secret: ComplexMatrix,
    noise_coeffs: Vec<RealMatrix>,
    n_points: usize,
    sigma_s: f64,
    trunc_t: f64,
}

fn check_params(degree: usize, n_points: usize, sigma_s: f64, trunc_t: f64) -> Result<()> {
    if degree < 1 {
        return Err(AmpcError::invalid("polynomial degree T must be at least 1"));
    }
    if n_points < degree + 1 {
        return Err(AmpcError::invalid(format!("need N >= T+1, got N={n_points}, T={degree}")));
    }
    // sigma_s == 0 is the documented noise-disabled hook.
    if !(sigma_s >= 0.0 && sigma_s.is_finite()) {
        return Err(AmpcError::invalid(format!("sigma_s must be finite and >= 0, got {sigma_s}")));
    }
    if !(trunc_t > 0.0 && trunc_t.is_finite()) {
        return Err(AmpcError::invalid(format!("truncation t must be positive, got {trunc_t}")));
    }
    Ok(())
}

/// Power table `pw[i-1][k-1] = ω_i^k`.
fn power_table(degree: usize, n_points: usize) -> Vec<Vec<Complex64>> {
    (1..=n_points)
        .map(|i| (1..=degree).map(|k| root_power(i, k, n_points)).collect())
        .collect()
}

fn combined_noise_within(coeffs: &[RealMatrix], powers: &[Vec<Complex64>], trunc_t: f64, ok: &mut usize, seen: &mut usize) -> bool {
    let len = coeffs[0].data().len();
    let mut accepted = true;
    for pw in powers {
        for e in 0..len {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in coeffs.iter().enumerate() {
                acc += pw[k] * c.data()[e];
            }
            *seen += 1;
            if acc.re.abs() <= trunc_t && acc.im.abs() <= trunc_t {
                *ok += 1;
            } else {
                accepted = false;
            }
        }
    }
    accepted
}

/// Draws the noise coefficients i.i.d. N(0, σ_s²), redrawing all `T` of them
/// together until the combined noise is inside `[-t, t]` at all `N` points.
pub fn make_share_polynomial<R: Rng + ?Sized>(
    secret_id: impl Into<String>,
    secret: impl Into<ComplexMatrix>,
    degree: usize,
    n_points: usize,
    sigma_s: f64,
    trunc_t: f64,
    rng: &mut R,
) -> Result<SharePolynomial> {
    check_params(degree, n_points, sigma_s, trunc_t)?;
    let secret = secret.into();
    if !secret.is_finite() {
        return Err(AmpcError::invalid("secret has non-finite entries"));
    }
    let (rows, cols) = secret.shape();
    let secret_id = secret_id.into();
    if sigma_s == 0.0 || rows * cols == 0 {
        let noise_coeffs = vec![RealMatrix::zeros(rows, cols); degree];
        return Ok(SharePolynomial { secret_id, secret, noise_coeffs, n_points, sigma_s, trunc_t });
    }

    let powers = power_table(degree, n_points);
    let (mut ok, mut seen) = (0usize, 0usize);
    for _ in 0..RESAMPLE_CAP {
        let coeffs: Vec<RealMatrix> = (0..degree)
            .map(|_| RealMatrix::from_fn(rows, cols, |_, _| sample_normal(sigma_s, rng)))
            .collect();
        if combined_noise_within(&coeffs, &powers, trunc_t, &mut ok, &mut seen) {
            return Ok(SharePolynomial { secret_id, secret, noise_coeffs: coeffs, n_points, sigma_s, trunc_t });
        }
    }
    Err(AmpcError::TruncationInfeasible {
        attempts: RESAMPLE_CAP,
        acceptance_rate: ok as f64 / seen as f64,
    })
}

impl SharePolynomial {
    /// Assembles a polynomial from explicit coefficients, checking the
    /// truncation invariant. Mostly useful for tests and worked examples.
    pub fn from_parts(
        secret_id: impl Into<String>,
        secret: impl Into<ComplexMatrix>,
        noise_coeffs: Vec<RealMatrix>,
        n_points: usize,
        trunc_t: f64,
    ) -> Result<Self> {
        let secret = secret.into();
        let degree = noise_coeffs.len();
        check_params(degree, n_points, 0.0, trunc_t)?;
        if noise_coeffs.iter().any(|c| c.shape() != secret.shape()) {
            return Err(AmpcError::invalid("noise coefficient shape differs from secret"));
        }
        let (mut ok, mut seen) = (0, 0);
        if secret.rows() * secret.cols() > 0
            && !combined_noise_within(&noise_coeffs, &power_table(degree, n_points), trunc_t, &mut ok, &mut seen)
        {
            return Err(AmpcError::invalid("combined noise exceeds truncation bound"));
        }
        Ok(Self { secret_id: secret_id.into(), secret, noise_coeffs, n_points, sigma_s: f64::NAN, trunc_t })
    }

    pub fn secret_id(&self) -> &str {
        &self.secret_id
    }

    pub fn secret(&self) -> &ComplexMatrix {
        &self.secret
    }

    pub fn noise_coeffs(&self) -> &[RealMatrix] {
        &self.noise_coeffs
    }

    pub fn degree(&self) -> usize {
        self.noise_coeffs.len()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    pub fn trunc_t(&self) -> f64 {
        self.trunc_t
    }

    /// Ñ_i = Σ_k ω_i^k N_k.
    pub fn combined_noise(&self, index: usize) -> ComplexMatrix {
        let (rows, cols) = self.secret.shape();
        let mut out = ComplexMatrix::zeros(rows, cols);
        for (k, c) in self.noise_coeffs.iter().enumerate() {
            let w = root_power(index, k + 1, self.n_points);
            for (o, &v) in out.data_mut().iter_mut().zip(c.data()) {
                *o += w * v;
            }
        }
        out
    }

    /// S(ω_index).
    pub fn evaluate(&self, index: usize) -> ComplexMatrix {
        let mut v = self.combined_noise(index);
        for (o, &s) in v.data_mut().iter_mut().zip(self.secret.data()) {
            *o += s;
        }
        v
    }
}

/// Evaluates the polynomial at ω_1..ω_N; share `i` goes to client `i`.
pub fn evaluate_shares(poly: &SharePolynomial) -> Vec<Share> {
    (1..=poly.n_points)
        .map(|i| Share::new(poly.secret_id.clone(), i, poly.degree(), poly.n_points, poly.evaluate(i)))
        .collect()
}

use std::borrow::Borrow;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::Share;
use crate::error::{AmpcError, Result};
use crate::numerics::{root_power, solve, Complex64, ComplexMatrix, RealMatrix};

/// Largest acceptable |Im z₀| before a reconstruction is flagged.
pub const IMAG_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub value: RealMatrix,
    /// Evaluation indices actually used, ascending.
    pub indices: Vec<usize>,
    pub max_imag: f64,
    /// Set when the imaginary residual exceeds [`IMAG_TOLERANCE`].
    pub warning: Option<String>,
}

type WeightKey = (Vec<usize>, usize);

fn weight_cache() -> &'static Mutex<HashMap<WeightKey, Arc<Vec<Complex64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<WeightKey, Arc<Vec<Complex64>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// g̃, the first row of G⁻¹ for the given ascending evaluation indices,
/// obtained by solving Gᵀ g̃ = e₀. Cached per (indices, N).
pub fn recovery_weights(indices: &[usize], n_points: usize) -> Result<Arc<Vec<Complex64>>> {
    let key = (indices.to_vec(), n_points);
    if let Some(w) = weight_cache().lock().expect("weight cache poisoned").get(&key) {
        return Ok(Arc::clone(w));
    }
    let m = indices.len();
    // Gᵀ[c][r] = ω_{idx_r}^c
    let gt = ComplexMatrix::from_fn(m, m, |c, r| root_power(indices[r], c, n_points));
    let mut e0 = ComplexMatrix::zeros(m, 1);
    e0.set(0, 0, Complex64::new(1.0, 0.0));
    let g = Arc::new(solve(&gt, &e0)?.data().to_vec());
    weight_cache()
        .lock()
        .expect("weight cache poisoned")
        .insert(key, Arc::clone(&g));
    Ok(g)
}

/// Picks the first T+1 distinct evaluation indices in ascending order and
/// checks that all shares agree on (shape, T, N).
fn select<S: Borrow<Share>>(shares: &[S]) -> Result<Vec<&Share>> {
    let first = shares.first().ok_or(AmpcError::InsufficientShares { needed: 2, got: 0 })?.borrow();
    let (degree, n_points, shape) = (first.degree(), first.n_points(), first.shape());
    for s in shares {
        let s = s.borrow();
        if s.degree() != degree || s.n_points() != n_points || s.shape() != shape {
            return Err(AmpcError::invalid(format!(
                "share {} of '{}' disagrees on (T, N, shape)",
                s.eval_index(),
                s.secret_id()
            )));
        }
        if s.eval_index() == 0 || s.eval_index() > n_points {
            return Err(AmpcError::invalid(format!("evaluation index {} outside 1..={n_points}", s.eval_index())));
        }
    }
    let mut sorted: Vec<&Share> = shares.iter().map(Borrow::borrow).collect();
    sorted.sort_by_key(|s| s.eval_index());
    sorted.dedup_by_key(|s| s.eval_index());
    if sorted.len() < degree + 1 {
        return Err(AmpcError::InsufficientShares { needed: degree + 1, got: sorted.len() });
    }
    sorted.truncate(degree + 1);
    Ok(sorted)
}

/// Recovers the (possibly complex) constant term z₀ = g̃ · [y]_{(T+1)}.
pub fn reconstruct_complex<S: Borrow<Share>>(shares: &[S]) -> Result<ComplexMatrix> {
    let chosen = select(shares)?;
    let indices: Vec<usize> = chosen.iter().map(|s| s.eval_index()).collect();
    let g = recovery_weights(&indices, chosen[0].n_points())?;
    let (rows, cols) = chosen[0].shape();
    let mut z0 = ComplexMatrix::zeros(rows, cols);
    for (w, s) in g.iter().zip(&chosen) {
        z0.axpy(*w, s.value())?;
    }
    Ok(z0)
}

/// Recovers a real secret from at least T+1 shares.
pub fn reconstruct<S: Borrow<Share>>(shares: &[S]) -> Result<Reconstruction> {
    let z0 = reconstruct_complex(shares)?;
    let indices = select(shares)?.iter().map(|s| s.eval_index()).collect();
    let max_imag = z0.max_abs_imag();
    let warning = (max_imag > IMAG_TOLERANCE).then(|| {
        format!("numerical degradation: imaginary residual {max_imag:.3e} exceeds {IMAG_TOLERANCE:e}")
    });
    Ok(Reconstruction { value: z0.re(), indices, max_imag, warning })
}

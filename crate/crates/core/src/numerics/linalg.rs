use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{AmpcError, Result};

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
/// `B` may have several right-hand-side columns.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(AmpcError::invalid("solve: matrix must be square"));
    }
    if b.rows() != n {
        return Err(AmpcError::invalid("solve: right-hand side row mismatch"));
    }
    let k = b.cols();
    let mut m: Vec<Complex64> = a.data().to_vec();
    let mut x: Vec<Complex64> = b.data().to_vec();
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(AmpcError::SingularMatrix("zero matrix".into()));
    }

    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= 1e-14 * scale {
            return Err(AmpcError::SingularMatrix(format!("pivot {col} vanishes")));
        }
        if piv != col {
            for c in 0..n {
                m.swap(piv * n + c, col * n + c);
            }
            for c in 0..k {
                x.swap(piv * k + c, col * k + c);
            }
        }
        let p = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..n {
                let v = m[col * n + c];
                m[r * n + c] -= f * v;
            }
            for c in 0..k {
                let v = x[col * k + c];
                x[r * k + c] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let p = m[col * n + col];
        for c in 0..k {
            let mut acc = x[col * k + c];
            for j in col + 1..n {
                acc -= m[col * n + j] * x[j * k + c];
            }
            x[col * k + c] = acc / p;
        }
    }
    ComplexMatrix::new(n, k, x)
}

/// Singular values, descending, by one-sided (Hestenes) Jacobi.
///
/// Each sweep orthogonalizes every column pair: the second column is first
/// rotated in phase so the pair's inner product is real, then a real Givens
/// rotation zeroes it. Converged column norms are the singular values.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let (rows, cols) = a.shape();
    let mut colv: Vec<Vec<Complex64>> =
        (0..cols).map(|c| (0..rows).map(|r| a.get(r, c)).collect()).collect();

    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = colv[p].iter().map(|v| v.norm_sqr()).sum();
                let beta: f64 = colv[q].iter().map(|v| v.norm_sqr()).sum();
                let gamma: Complex64 =
                    colv[p].iter().zip(&colv[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = Complex64::from_polar(1.0, -gamma.arg());
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = colv.split_at_mut(q);
                for (ap, aq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let aqt = *aq * phase;
                    let np = *ap * c - aqt * s;
                    let nq = *ap * s + aqt * c;
                    *ap = np;
                    *aq = nq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> =
        colv.iter().map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

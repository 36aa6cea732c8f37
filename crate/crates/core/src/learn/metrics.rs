use crate::error::{AmpcError, Result};
use crate::numerics::RealMatrix;

/// ĝ(x) = 1/2 + x/4, the degree-1 sigmoid surrogate. Not clamped: it is
/// applied share-wise, where only affine maps are available.
pub fn sigmoid_approx(x: f64) -> f64 {
    0.5 + 0.25 * x
}

/// X·w as a plain vector.
pub fn predict(x: &RealMatrix, w: &[f64]) -> Vec<f64> {
    (0..x.rows()).map(|r| x.row(r).iter().zip(w).map(|(a, b)| a * b).sum()).collect()
}

/// Fraction of rows where the thresholded prediction matches `y`.
/// ĝ(Xw) ≥ 1/2 exactly when Xw ≥ 0.
pub fn accuracy(w: &[f64], x: &RealMatrix, y: &[f64]) -> Result<f64> {
    if x.rows() != y.len() || x.cols() != w.len() || y.is_empty() {
        return Err(AmpcError::invalid("accuracy: dimension mismatch"));
    }
    let hits = predict(x, w)
        .iter()
        .zip(y)
        .filter(|(p, &label)| (sigmoid_approx(**p) >= 0.5) == (label >= 0.5))
        .count();
    Ok(hits as f64 / y.len() as f64)
}

/// ‖y − ŷ‖ / ‖y‖.
pub fn relative_error(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(AmpcError::invalid("relative_error: length mismatch"));
    }
    let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(AmpcError::invalid("relative_error: ‖y‖ is zero"));
    }
    let diff: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(diff / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_points() {
        assert_eq!(sigmoid_approx(0.0), 0.5);
        assert_eq!(sigmoid_approx(2.0), 1.0);
        assert_eq!(sigmoid_approx(-2.0), 0.0);
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(relative_error(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        let y = [0.3, -1.2, 2.5];
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        assert!((relative_error(&y, &y2).unwrap() - 1.0).abs() < 1e-15);
        assert!(relative_error(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn accuracy_thresholds_at_zero() {
        let x = RealMatrix::from_rows(&[vec![1.0], vec![-1.0], vec![2.0]]).unwrap();
        assert_eq!(accuracy(&[1.0], &x, &[1.0, 0.0, 0.0]).unwrap(), 2.0 / 3.0);
    }
}

//! Goodness-of-fit metrics.

use crate::error::{JennError, Result};

/// Returns `(r_squared, error_std)`.
///
/// `R^2 = 1 - SS_res / SS_tot` can go negative when predictions are
/// worse than the mean. `error_std` is the population standard deviation
/// of `y_pred - y_true`.
pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<(f64, f64)> {
    if y_true.len() != y_pred.len() {
        return Err(JennError::ShapeMismatch(format!(
            "length mismatch: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let n = y_true.len();
    if n < 2 {
        return Err(JennError::InvalidArgument(
            "metrics need at least two points".into(),
        ));
    }
    let mean = y_true.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y_true.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(JennError::DegenerateData(
            "y_true is constant; R^2 undefined".into(),
        ));
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred.iter())
        .map(|(t, p)| (t - p).powi(2))
        .sum();
    let r_squared = 1.0 - ss_res / ss_tot;

    let err_mean = y_pred
        .iter()
        .zip(y_true.iter())
        .map(|(p, t)| p - t)
        .sum::<f64>()
        / n as f64;
    let err_var = y_pred
        .iter()
        .zip(y_true.iter())
        .map(|(p, t)| (p - t - err_mean).powi(2))
        .sum::<f64>()
        / n as f64;
    Ok((r_squared, err_var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn perfect_prediction() {
        let y = [1.0, 2.0, 3.0];
        let (r2, std) = metrics(&y, &y).unwrap();
        assert_eq!(r2, 1.0);
        assert_eq!(std, 0.0);
    }

    #[test]
    fn predicting_the_mean_gives_zero() {
        let y_true = [1.0, 2.0, 3.0, 4.0];
        let y_pred = [2.5; 4];
        let (r2, _) = metrics(&y_true, &y_pred).unwrap();
        assert_relative_eq!(r2, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn worse_than_mean_is_negative() {
        let y_true = [1.0, 2.0, 3.0, 4.0];
        let y_pred = [4.0, 3.0, 2.0, 1.0];
        let (r2, _) = metrics(&y_true, &y_pred).unwrap();
        assert!(r2 < 0.0);
    }

    #[test]
    fn constant_truth_errors() {
        assert!(metrics(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn shift_invariance() {
        let y_true = [1.0, 2.0, 4.0, 8.0];
        let y_pred = [1.1, 2.2, 3.9, 7.5];
        let (r2, _) = metrics(&y_true, &y_pred).unwrap();
        let shifted_t: Vec<f64> = y_true.iter().map(|v| v + 100.0).collect();
        let shifted_p: Vec<f64> = y_pred.iter().map(|v| v + 100.0).collect();
        let (r2s, _) = metrics(&shifted_t, &shifted_p).unwrap();
        assert_relative_eq!(r2, r2s, epsilon = 1e-9);
    }
}

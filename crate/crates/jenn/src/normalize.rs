//! Input/output normalization with chain-rule rescaling of partials.
//!
//! Inputs and outputs are centered and scaled per row (one statistic per
//! input or output channel). Jacobian entries pick up the ratio
//! `sigma_x[j] / sigma_y[k]` so that normalized partials are consistent
//! with the normalized value function.

use ndarray::{Array1, Array2, Array3, Axis};

use crate::dataset::Dataset;
use crate::error::{JennError, Result};

/// Lower clamp for standard deviations so constant rows stay well-defined.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub mu_x: Array1<f64>,
    pub sigma_x: Array1<f64>,
    pub mu_y: Array1<f64>,
    pub sigma_y: Array1<f64>,
}

impl NormalizationStats {
    /// Identity statistics: mean 0, sigma 1. Normalization is a no-op.
    pub fn identity(n_x: usize, n_y: usize) -> Self {
        NormalizationStats {
            mu_x: Array1::zeros(n_x),
            sigma_x: Array1::ones(n_x),
            mu_y: Array1::zeros(n_y),
            sigma_y: Array1::ones(n_y),
        }
    }
}

fn row_stats(a: &Array2<f64>) -> (Array1<f64>, Array1<f64>) {
    let m = a.ncols() as f64;
    let mu = a.mean_axis(Axis(1)).expect("m >= 1");
    // Population (1/m) standard deviation.
    let mut sigma = Array1::zeros(a.nrows());
    for (i, row) in a.rows().into_iter().enumerate() {
        let var = row.iter().map(|v| (v - mu[i]).powi(2)).sum::<f64>() / m;
        sigma[i] = var.sqrt().max(SIGMA_FLOOR);
    }
    (mu, sigma)
}

/// Per-row mean and population standard deviation of the dataset's X and
/// Y, with sigma clamped below by [`SIGMA_FLOOR`].
pub fn compute_normalization(data: &Dataset) -> NormalizationStats {
    let (mu_x, sigma_x) = row_stats(&data.x);
    let (mu_y, sigma_y) = row_stats(&data.y);
    NormalizationStats { mu_x, sigma_x, mu_y, sigma_y }
}

fn check_dims(data: &Dataset, stats: &NormalizationStats) -> Result<()> {
    if stats.mu_x.len() != data.num_inputs() || stats.mu_y.len() != data.num_outputs() {
        return Err(JennError::ShapeMismatch(format!(
            "stats sized for ({}, {}) but dataset has ({}, {})",
            stats.mu_x.len(),
            stats.mu_y.len(),
            data.num_inputs(),
            data.num_outputs()
        )));
    }
    Ok(())
}

/// Centers/scales X and Y and rescales each Jacobian entry by
/// `sigma_x[j] / sigma_y[k]`. Beta and gamma pass through unchanged.
pub fn normalize_dataset(data: &Dataset, stats: &NormalizationStats) -> Result<Dataset> {
    check_dims(data, stats)?;
    let mut out = data.clone();
    for (i, mut row) in out.x.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| (v - stats.mu_x[i]) / stats.sigma_x[i]);
    }
    for (k, mut row) in out.y.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| (v - stats.mu_y[k]) / stats.sigma_y[k]);
    }
    for ((k, j, _), v) in out.j.indexed_iter_mut() {
        *v *= stats.sigma_x[j] / stats.sigma_y[k];
    }
    Ok(out)
}

/// Inverse of normalization for raw inputs only; used when feeding new
/// points through a trained model.
pub fn normalize_inputs(x_raw: &Array2<f64>, stats: &NormalizationStats) -> Result<Array2<f64>> {
    if x_raw.nrows() != stats.mu_x.len() {
        return Err(JennError::ShapeMismatch(format!(
            "input has {} rows, stats expect {}",
            x_raw.nrows(),
            stats.mu_x.len()
        )));
    }
    let mut x = x_raw.clone();
    for (i, mut row) in x.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| (v - stats.mu_x[i]) / stats.sigma_x[i]);
    }
    Ok(x)
}

/// Maps normalized predictions back to raw units:
/// `y = y_hat * sigma_y + mu_y`, `J[k][j] = j_hat[k][j] * sigma_y[k] / sigma_x[j]`.
pub fn denormalize_prediction(
    y_hat: &Array2<f64>,
    j_hat: &Array3<f64>,
    stats: &NormalizationStats,
) -> Result<(Array2<f64>, Array3<f64>)> {
    if y_hat.nrows() != stats.mu_y.len() {
        return Err(JennError::ShapeMismatch(format!(
            "prediction has {} output rows, stats expect {}",
            y_hat.nrows(),
            stats.mu_y.len()
        )));
    }
    if j_hat.dim().0 != stats.mu_y.len() || j_hat.dim().1 != stats.mu_x.len() {
        return Err(JennError::ShapeMismatch(format!(
            "Jacobian shape {:?} inconsistent with stats ({}, {})",
            j_hat.dim(),
            stats.mu_y.len(),
            stats.mu_x.len()
        )));
    }
    let mut y = y_hat.clone();
    for (k, mut row) in y.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| v * stats.sigma_y[k] + stats.mu_y[k]);
    }
    let mut j = j_hat.clone();
    for ((k, jj, _), v) in j.indexed_iter_mut() {
        *v *= stats.sigma_y[k] / stats.sigma_x[jj];
    }
    Ok((y, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn simple_dataset() -> Dataset {
        let x = array![[0.0, 2.0], [5.0, 5.0]];
        let y = array![[1.0, 3.0]];
        let j = Array3::from_elem((1, 2, 2), 3.0);
        Dataset::with_jacobian(x, y, j).unwrap()
    }

    #[test]
    fn two_point_row_normalizes_to_plus_minus_one() {
        let d = simple_dataset();
        let stats = compute_normalization(&d);
        assert_relative_eq!(stats.mu_x[0], 1.0);
        assert_relative_eq!(stats.sigma_x[0], 1.0);
        let norm = normalize_dataset(&d, &stats).unwrap();
        assert_relative_eq!(norm.x[[0, 0]], -1.0);
        assert_relative_eq!(norm.x[[0, 1]], 1.0);
    }

    #[test]
    fn constant_row_clamps_sigma_and_zeroes_out() {
        let d = simple_dataset();
        let stats = compute_normalization(&d);
        assert_eq!(stats.sigma_x[1], SIGMA_FLOOR);
        let norm = normalize_dataset(&d, &stats).unwrap();
        assert_eq!(norm.x[[1, 0]], 0.0);
        assert_eq!(norm.x[[1, 1]], 0.0);
    }

    #[test]
    fn population_sigma() {
        let x = array![[1.0, 2.0, 3.0, 4.0]];
        let y = array![[0.0, 0.0, 1.0, 1.0]];
        let d = Dataset::values_only(x, y).unwrap();
        let stats = compute_normalization(&d);
        assert_relative_eq!(stats.mu_x[0], 2.5);
        assert_relative_eq!(stats.sigma_x[0], (1.25f64).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn jacobian_entry_scales_by_sigma_ratio() {
        let d = simple_dataset();
        let mut stats = compute_normalization(&d);
        stats.sigma_x = array![2.0, 2.0];
        stats.sigma_y = array![4.0];
        let norm = normalize_dataset(&d, &stats).unwrap();
        assert_relative_eq!(norm.j[[0, 0, 0]], 1.5);
    }

    #[test]
    fn identity_stats_leave_dataset_unchanged() {
        let d = simple_dataset();
        let stats = NormalizationStats::identity(2, 1);
        let norm = normalize_dataset(&d, &stats).unwrap();
        assert_eq!(norm.x, d.x);
        assert_eq!(norm.y, d.y);
        assert_eq!(norm.j, d.j);
    }

    #[test]
    fn round_trip_recovers_raw_values() {
        let x = array![[0.5, -1.2, 3.3], [7.0, 8.5, 2.0]];
        let y = array![[10.0, -4.0, 6.0]];
        let mut j = Array3::zeros((1, 2, 3));
        for (i, v) in j.iter_mut().enumerate() {
            *v = 0.3 * i as f64 - 1.0;
        }
        let d = Dataset::with_jacobian(x, y, j).unwrap();
        let stats = compute_normalization(&d);
        let norm = normalize_dataset(&d, &stats).unwrap();
        let (y_raw, j_raw) = denormalize_prediction(&norm.y, &norm.j, &stats).unwrap();
        for (a, b) in y_raw.iter().zip(d.y.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        for (a, b) in j_raw.iter().zip(d.j.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn denormalize_applies_affine_map() {
        let stats = NormalizationStats {
            mu_x: array![0.0],
            sigma_x: array![1.0],
            mu_y: array![10.0],
            sigma_y: array![2.0],
        };
        let y_hat = array![[1.0]];
        let j_hat = Array3::zeros((1, 1, 1));
        let (y, _) = denormalize_prediction(&y_hat, &j_hat, &stats).unwrap();
        assert_eq!(y[[0, 0]], 12.0);
    }

    #[test]
    fn normalized_rows_have_zero_mean_unit_sigma() {
        let x = array![[0.4, -2.0, 5.0, 1.1, 0.0]];
        let y = array![[3.0, 1.0, -7.0, 2.0, 0.5]];
        let d = Dataset::values_only(x, y).unwrap();
        let stats = compute_normalization(&d);
        let norm = normalize_dataset(&d, &stats).unwrap();
        let again = compute_normalization(&norm);
        assert!(again.mu_x[0].abs() < 1e-10);
        assert!((again.sigma_x[0] - 1.0).abs() < 1e-10);
        assert!(again.mu_y[0].abs() < 1e-10);
        assert!((again.sigma_y[0] - 1.0).abs() < 1e-10);
    }
}

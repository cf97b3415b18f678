//! Training data container.
//!
//! Arrays follow the column-per-example layout: inputs are `(n_x, m)`,
//! outputs `(n_y, m)`, and Jacobians `(n_y, n_x, m)` where entry
//! `(k, j, t)` holds the partial of output `k` w.r.t. input `j` at
//! example `t`.
//!
//! A dataset without Jacobian information is stored as a zero Jacobian
//! tensor with all gamma weights set to zero, so values-only and
//! gradient-enhanced training share one code path. Per-entry gamma masks
//! cover the incomplete-partials case where only some inputs have
//! derivatives.

use ndarray::{Array2, Array3};

use crate::error::{JennError, Result};

#[derive(Debug, Clone)]
pub struct Dataset {
    /// Inputs, shape `(n_x, m)`.
    pub x: Array2<f64>,
    /// Outputs, shape `(n_y, m)`.
    pub y: Array2<f64>,
    /// Jacobian targets, shape `(n_y, n_x, m)`. All zeros when no
    /// partials were provided.
    pub j: Array3<f64>,
    /// Value-error weights, shape `(n_y, m)`.
    pub beta: Array2<f64>,
    /// Partial-error weights, shape `(n_y, n_x, m)`.
    pub gamma: Array3<f64>,
}

fn check_finite_2d(name: &str, a: &Array2<f64>) -> Result<()> {
    for ((r, c), v) in a.indexed_iter() {
        if !v.is_finite() {
            return Err(JennError::NonFinite {
                context: name.to_string(),
                location: format!("row {r}, column {c}"),
            });
        }
    }
    Ok(())
}

fn check_finite_3d(name: &str, a: &Array3<f64>) -> Result<()> {
    for ((k, j, t), v) in a.indexed_iter() {
        if !v.is_finite() {
            return Err(JennError::NonFinite {
                context: name.to_string(),
                location: format!("output {k}, input {j}, example {t}"),
            });
        }
    }
    Ok(())
}

impl Dataset {
    /// Builds a dataset, validating shapes, finiteness, and weight signs.
    ///
    /// `beta` defaults to 1 everywhere. `gamma` defaults to 1 when a
    /// Jacobian is supplied and to 0 otherwise. Passing a nonzero
    /// `gamma` without a Jacobian is rejected.
    pub fn new(
        x: Array2<f64>,
        y: Array2<f64>,
        j: Option<Array3<f64>>,
        beta: Option<Array2<f64>>,
        gamma: Option<Array3<f64>>,
    ) -> Result<Self> {
        let (n_x, m) = x.dim();
        let (n_y, m_y) = y.dim();
        if m == 0 || n_x == 0 || n_y == 0 {
            return Err(JennError::InvalidArgument(
                "dataset requires m >= 1, n_x >= 1, n_y >= 1".into(),
            ));
        }
        if m_y != m {
            return Err(JennError::ShapeMismatch(format!(
                "X has {m} examples but Y has {m_y}"
            )));
        }
        check_finite_2d("X", &x)?;
        check_finite_2d("Y", &y)?;

        let has_jacobian = j.is_some();
        let j = match j {
            Some(j) => {
                if j.dim() != (n_y, n_x, m) {
                    return Err(JennError::ShapeMismatch(format!(
                        "Jacobian shape {:?} does not match ({n_y}, {n_x}, {m})",
                        j.dim()
                    )));
                }
                check_finite_3d("J", &j)?;
                j
            }
            None => Array3::zeros((n_y, n_x, m)),
        };

        let beta = match beta {
            Some(b) => {
                if b.dim() != (n_y, m) {
                    return Err(JennError::ShapeMismatch(format!(
                        "beta shape {:?} does not match ({n_y}, {m})",
                        b.dim()
                    )));
                }
                b
            }
            None => Array2::ones((n_y, m)),
        };
        let gamma = match gamma {
            Some(g) => {
                if g.dim() != (n_y, n_x, m) {
                    return Err(JennError::ShapeMismatch(format!(
                        "gamma shape {:?} does not match ({n_y}, {n_x}, {m})",
                        g.dim()
                    )));
                }
                if !has_jacobian && g.iter().any(|&v| v != 0.0) {
                    return Err(JennError::InvalidArgument(
                        "nonzero gamma requires a Jacobian".into(),
                    ));
                }
                g
            }
            None => {
                if has_jacobian {
                    Array3::ones((n_y, n_x, m))
                } else {
                    Array3::zeros((n_y, n_x, m))
                }
            }
        };
        if beta.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(JennError::InvalidArgument(
                "beta entries must be finite and >= 0".into(),
            ));
        }
        if gamma.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(JennError::InvalidArgument(
                "gamma entries must be finite and >= 0".into(),
            ));
        }

        Ok(Dataset { x, y, j, beta, gamma })
    }

    /// Values-only dataset: zero Jacobian, gamma identically zero.
    pub fn values_only(x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        Dataset::new(x, y, None, None, None)
    }

    /// Dataset with full Jacobian targets and default unit weights.
    pub fn with_jacobian(x: Array2<f64>, y: Array2<f64>, j: Array3<f64>) -> Result<Self> {
        Dataset::new(x, y, Some(j), None, None)
    }

    pub fn num_inputs(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_outputs(&self) -> usize {
        self.y.nrows()
    }

    pub fn num_examples(&self) -> usize {
        self.x.ncols()
    }

    /// Multiplies all gamma weights by a scalar.
    pub fn scale_gamma(&mut self, factor: f64) {
        self.gamma.mapv_inplace(|g| g * factor);
    }

    /// Returns a copy restricted to the given example columns.
    pub fn select_examples(&self, idx: &[usize]) -> Dataset {
        let nb = idx.len();
        let (n_y, n_x, _) = self.j.dim();
        let mut x = Array2::zeros((n_x, nb));
        let mut y = Array2::zeros((n_y, nb));
        let mut j = Array3::zeros((n_y, n_x, nb));
        let mut beta = Array2::zeros((n_y, nb));
        let mut gamma = Array3::zeros((n_y, n_x, nb));
        for (col, &t) in idx.iter().enumerate() {
            x.column_mut(col).assign(&self.x.column(t));
            y.column_mut(col).assign(&self.y.column(t));
            beta.column_mut(col).assign(&self.beta.column(t));
            j.index_axis_mut(ndarray::Axis(2), col)
                .assign(&self.j.index_axis(ndarray::Axis(2), t));
            gamma
                .index_axis_mut(ndarray::Axis(2), col)
                .assign(&self.gamma.index_axis(ndarray::Axis(2), t));
        }
        Dataset { x, y, j, beta, gamma }
    }
}

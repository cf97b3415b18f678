//! Activation functions with first and second derivatives.
//!
//! The second derivative shows up in backpropagation because the loss
//! penalizes predicted partials, whose sensitivity to pre-activations
//! involves g''.

use ndarray::Array2;

use crate::error::{JennError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// Hyperbolic tangent, used on hidden layers.
    Tanh,
    /// Identity, used on the output layer.
    Linear,
}

impl Activation {
    /// Evaluates g(z) elementwise.
    pub fn eval(&self, z: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Tanh => z.mapv(f64::tanh),
            Activation::Linear => z.clone(),
        }
    }

    /// g'(z) given the already-computed activation a = g(z).
    pub fn prime_from_output(&self, a: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Tanh => a.mapv(|a| 1.0 - a * a),
            Activation::Linear => Array2::ones(a.dim()),
        }
    }

    /// g''(z) given a = g(z) and g'(z).
    pub fn double_prime_from_output(&self, a: &Array2<f64>, g_prime: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Tanh => -2.0 * a * g_prime,
            Activation::Linear => Array2::zeros(a.dim()),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = JennError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "linear" => Ok(Activation::Linear),
            other => Err(JennError::InvalidArgument(format!(
                "unknown activation '{other}' (expected 'tanh' or 'linear')"
            ))),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Activation::Tanh => write!(f, "tanh"),
            Activation::Linear => write!(f, "linear"),
        }
    }
}

/// Scalar evaluation of (g, g', g'') at a single point.
pub fn activation_scalar(kind: Activation, z: f64) -> (f64, f64, f64) {
    match kind {
        Activation::Tanh => {
            let g = z.tanh();
            let gp = 1.0 - g * g;
            (g, gp, -2.0 * g * gp)
        }
        Activation::Linear => (z, 1.0, 0.0),
    }
}

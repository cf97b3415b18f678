//! Parameter update rules: plain gradient descent and ADAM.

use ndarray::{Array1, Array2};

use crate::error::{JennError, Result};
use crate::params::Parameters;
use crate::training::Gradients;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Gd,
    Adam,
}

impl std::str::FromStr for OptimizerKind {
    type Err = JennError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(OptimizerKind::Gd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(JennError::InvalidArgument(format!(
                "unknown optimizer '{other}' (expected 'gd' or 'adam')"
            ))),
        }
    }
}

/// First/second moment estimates for ADAM; unused for plain gradient
/// descent but kept so both rules share one update entry point.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    m_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_w: Vec<Array2<f64>>,
    v_b: Vec<Array1<f64>>,
    step: u64,
}

impl OptimizerState {
    pub fn new(params: &Parameters) -> Self {
        OptimizerState {
            m_w: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_b: params.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_w: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_b: params.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            step: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UpdateSettings {
    pub optimizer: OptimizerKind,
    pub alpha: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

/// Applies one optimizer step in place.
pub fn update_parameters(
    params: &mut Parameters,
    grads: &Gradients,
    state: &mut OptimizerState,
    settings: &UpdateSettings,
) -> Result<()> {
    if grads.d_weights.len() != params.weights.len()
        || grads
            .d_weights
            .iter()
            .zip(params.weights.iter())
            .any(|(g, w)| g.dim() != w.dim())
    {
        return Err(JennError::ShapeMismatch(
            "gradient shapes do not match parameters".into(),
        ));
    }
    match settings.optimizer {
        OptimizerKind::Gd => {
            for l in 0..params.weights.len() {
                params.weights[l].scaled_add(-settings.alpha, &grads.d_weights[l]);
                params.biases[l].scaled_add(-settings.alpha, &grads.d_biases[l]);
            }
        }
        OptimizerKind::Adam => {
            state.step += 1;
            let (b1, b2, eps) = (settings.adam_beta1, settings.adam_beta2, settings.adam_eps);
            let bc1 = 1.0 - b1.powi(state.step as i32);
            let bc2 = 1.0 - b2.powi(state.step as i32);
            for l in 0..params.weights.len() {
                adam_step(
                    &mut params.weights[l],
                    &grads.d_weights[l],
                    &mut state.m_w[l],
                    &mut state.v_w[l],
                    settings.alpha,
                    b1,
                    b2,
                    eps,
                    bc1,
                    bc2,
                );
                adam_step(
                    &mut params.biases[l],
                    &grads.d_biases[l],
                    &mut state.m_b[l],
                    &mut state.v_b[l],
                    settings.alpha,
                    b1,
                    b2,
                    eps,
                    bc1,
                    bc2,
                );
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn adam_step<D: ndarray::Dimension>(
    theta: &mut ndarray::Array<f64, D>,
    grad: &ndarray::Array<f64, D>,
    m: &mut ndarray::Array<f64, D>,
    v: &mut ndarray::Array<f64, D>,
    alpha: f64,
    b1: f64,
    b2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    ndarray::Zip::from(theta)
        .and(grad)
        .and(m)
        .and(v)
        .for_each(|t, &g, m, v| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *t -= alpha * m_hat / (v_hat.sqrt() + eps);
        });
}

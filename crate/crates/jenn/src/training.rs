//! Jacobian-augmented loss, backpropagation, gradient checking, the
//! training loop, and polishing weights.
//!
//! The loss for one example is
//!
//! ```text
//! L = 1/2 sum_s beta_s (a_s - y_s)^2
//!   + 1/2 sum_s sum_j gamma_sj (a'_sj - y'_sj)^2
//! ```
//!
//! and the cost averages L over examples plus an L2 weight penalty
//! `lambda/(2m) sum w^2`. Backpropagation seeds the output layer with
//! the residuals of both terms and recurses; the partial-error term
//! introduces g'' factors because predicted partials depend on the
//! pre-activations twice (through g'(z) and through z').

use ndarray::{Array1, Array2, Array3, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{JennError, Result};
use crate::model::Model;
use crate::normalize::{compute_normalization, normalize_dataset};
use crate::optimizer::{update_parameters, OptimizerKind, OptimizerState, UpdateSettings};
use crate::params::{init_parameters, Architecture, Parameters};
use crate::propagation::{forward_with_partials, ForwardCache};

/// Cost gradients w.r.t. every weight matrix and bias vector.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub d_weights: Vec<Array2<f64>>,
    pub d_biases: Vec<Array1<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSize {
    Full,
    Size(usize),
}

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: BatchSize,
    pub optimizer: OptimizerKind,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Scalar multiplier applied to the dataset's gamma weights, so
    /// gradient enhancement can be turned off (0) or reweighted without
    /// mutating the data.
    pub gamma_scale: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            alpha: 0.05,
            lambda: 0.0,
            epochs: 1000,
            batch_size: BatchSize::Full,
            optimizer: OptimizerKind::Adam,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            gamma_scale: 1.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 0.0 {
            return Err(JennError::InvalidArgument("alpha must be > 0".into()));
        }
        if self.lambda < 0.0 {
            return Err(JennError::InvalidArgument("lambda must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(JennError::InvalidArgument(
                "adam betas must lie in [0, 1)".into(),
            ));
        }
        if self.adam_eps <= 0.0 {
            return Err(JennError::InvalidArgument("adam_eps must be > 0".into()));
        }
        if self.gamma_scale < 0.0 {
            return Err(JennError::InvalidArgument("gamma_scale must be >= 0".into()));
        }
        if let BatchSize::Size(0) = self.batch_size {
            return Err(JennError::InvalidArgument("batch_size must be >= 1".into()));
        }
        Ok(())
    }

    fn update_settings(&self) -> UpdateSettings {
        UpdateSettings {
            optimizer: self.optimizer,
            alpha: self.alpha,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_eps: self.adam_eps,
        }
    }
}

/// Radial-basis reweighting of gamma around zero slope.
#[derive(Debug, Clone, Copy)]
pub struct PolishConfig {
    /// Amplification at zero slope; gamma peaks at `1 + eta`.
    pub eta: f64,
    /// Inverse width of the basis function.
    pub epsilon: f64,
}

impl PolishConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta < 0.0 {
            return Err(JennError::InvalidArgument("eta must be >= 0".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(JennError::InvalidArgument("epsilon must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub cost_history: Vec<f64>,
    pub final_cost: f64,
    pub epochs_run: usize,
}

/// Mean per-example loss over the (normalized) dataset, regularization
/// excluded.
pub fn loss(cache: &ForwardCache, data: &Dataset) -> Result<f64> {
    let m = data.num_examples() as f64;
    let a = cache.output();
    if a.dim() != data.y.dim() {
        return Err(JennError::ShapeMismatch(format!(
            "cache output {:?} does not match Y {:?}",
            a.dim(),
            data.y.dim()
        )));
    }
    let mut total = 0.0;
    for ((k, t), &av) in a.indexed_iter() {
        let r = av - data.y[[k, t]];
        total += data.beta[[k, t]] * r * r;
    }
    if cache.has_partials() {
        let ap = cache.output_partials();
        for ((k, j, t), &apv) in ap.indexed_iter() {
            let r = apv - data.j[[k, j, t]];
            total += data.gamma[[k, j, t]] * r * r;
        }
    } else if data.gamma.iter().any(|&g| g != 0.0) {
        return Err(JennError::InvalidArgument(
            "nonzero gamma requires a cache with partials".into(),
        ));
    }
    Ok(0.5 * total / m)
}

/// Loss plus the L2 weight penalty `lambda/(2m) sum w^2`.
pub fn cost(params: &Parameters, cache: &ForwardCache, data: &Dataset, lambda: f64) -> Result<f64> {
    let m = data.num_examples() as f64;
    let reg: f64 = params
        .weights
        .iter()
        .map(|w| w.iter().map(|v| v * v).sum::<f64>())
        .sum();
    Ok(loss(cache, data)? + 0.5 * lambda / m * reg)
}

/// Backpropagates the Jacobian-augmented cost through the cache.
///
/// Requires a cache from [`forward_with_partials`] on the dataset's X.
pub fn backward(
    arch: &Architecture,
    params: &Parameters,
    cache: &ForwardCache,
    data: &Dataset,
    lambda: f64,
) -> Result<Gradients> {
    if !cache.has_partials() {
        return Err(JennError::InvalidArgument(
            "backward requires a cache with partials".into(),
        ));
    }
    let m = data.num_examples();
    let m_f = m as f64;
    let n_x = data.num_inputs();
    let num_layers = params.num_layers();

    // Output-layer seeds: residuals weighted by beta / gamma.
    let mut d_a = &data.beta * &(cache.output() - &data.y);
    let mut d_ap = &data.gamma * &(cache.output_partials() - &data.j);

    let mut d_weights = vec![Array2::zeros((0, 0)); num_layers];
    let mut d_biases = vec![Array1::zeros(0); num_layers];

    for l in (0..num_layers).rev() {
        let w = &params.weights[l];
        let act = arch.activation(l);
        let a_cur = &cache.a[l + 1];
        let a_prev = &cache.a[l];
        let g_prime = act.prime_from_output(a_cur);
        let g_dbl = act.double_prime_from_output(a_cur, &g_prime);

        let dz = &g_prime * &d_a;
        let mut dw = dz.dot(&a_prev.t());
        let mut db_terms = dz.clone();
        let mut d_a_prev = w.t().dot(&dz);
        let n_prev = w.ncols();
        let mut d_ap_prev = Array3::zeros((n_prev, n_x, m));

        for j in 0..n_x {
            let zpj = cache.z_prime[l + 1].index_axis(Axis(1), j);
            let apj_prev = cache.a_prime[l].index_axis(Axis(1), j);
            let dapj = d_ap.index_axis(Axis(1), j);
            // Sensitivity of a'_j to z (via g'') and to z'_j (via g').
            let t1 = &g_dbl * &zpj * &dapj;
            let t2 = &g_prime * &dapj;
            dw += &t1.dot(&a_prev.t());
            dw += &t2.dot(&apj_prev.t());
            db_terms += &t1;
            d_a_prev += &w.t().dot(&t1);
            d_ap_prev.index_axis_mut(Axis(1), j).assign(&w.t().dot(&t2));
        }

        dw.mapv_inplace(|v| v / m_f);
        dw.scaled_add(lambda / m_f, w);
        let db = db_terms.sum_axis(Axis(1)) / m_f;

        if dw.iter().any(|v| !v.is_finite()) || db.iter().any(|v| !v.is_finite()) {
            return Err(JennError::NonFinite {
                context: "backward gradients".into(),
                location: format!("layer {}", l + 1),
            });
        }

        d_weights[l] = dw;
        d_biases[l] = db;
        d_a = d_a_prev;
        d_ap = d_ap_prev;
    }

    Ok(Gradients { d_weights, d_biases })
}

/// Central-difference verification of [`backward`].
///
/// Perturbs every parameter by +-h, finite-differences [`cost`], and
/// returns the worst per-layer relative discrepancy, measured as
/// `||g_fd - g_bp|| / (||g_fd|| + ||g_bp||)`.
pub fn gradient_check(
    arch: &Architecture,
    params: &Parameters,
    data: &Dataset,
    lambda: f64,
    h: f64,
) -> Result<f64> {
    if h <= 0.0 {
        return Err(JennError::InvalidArgument("step h must be > 0".into()));
    }
    let cache = forward_with_partials(arch, params, &data.x)?;
    let grads = backward(arch, params, &cache, data, lambda)?;

    let eval = |p: &Parameters| -> Result<f64> {
        let c = forward_with_partials(arch, p, &data.x)?;
        cost(p, &c, data, lambda)
    };

    let mut worst = 0.0f64;
    let mut scratch = params.clone();
    for l in 0..params.num_layers() {
        let (rows, cols) = params.weights[l].dim();
        let mut fd_w = Array2::zeros((rows, cols));
        for r in 0..rows {
            for c in 0..cols {
                let orig = scratch.weights[l][[r, c]];
                scratch.weights[l][[r, c]] = orig + h;
                let plus = eval(&scratch)?;
                scratch.weights[l][[r, c]] = orig - h;
                let minus = eval(&scratch)?;
                scratch.weights[l][[r, c]] = orig;
                fd_w[[r, c]] = (plus - minus) / (2.0 * h);
            }
        }
        let mut fd_b = Array1::zeros(params.biases[l].len());
        for i in 0..params.biases[l].len() {
            let orig = scratch.biases[l][i];
            scratch.biases[l][i] = orig + h;
            let plus = eval(&scratch)?;
            scratch.biases[l][i] = orig - h;
            let minus = eval(&scratch)?;
            scratch.biases[l][i] = orig;
            fd_b[i] = (plus - minus) / (2.0 * h);
        }
        worst = worst.max(norm_rel_err(&fd_w, &grads.d_weights[l]));
        worst = worst.max(norm_rel_err(&fd_b, &grads.d_biases[l]));
    }
    Ok(worst)
}

fn norm_rel_err<D: ndarray::Dimension>(
    a: &ndarray::Array<f64, D>,
    b: &ndarray::Array<f64, D>,
) -> f64 {
    let diff = a - b;
    let num = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
    let den = a.iter().map(|v| v * v).sum::<f64>().sqrt()
        + b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Elementwise `gamma = 1 + eta * exp(-(epsilon * slope)^2)` over a raw
/// Jacobian tensor. Values lie in `[1, 1 + eta]`, peaking where slopes
/// vanish.
pub fn polish_weights(j_raw: &Array3<f64>, polish: &PolishConfig) -> Result<Array3<f64>> {
    polish.validate()?;
    Ok(j_raw.mapv(|v| 1.0 + polish.eta * (-(polish.epsilon * v).powi(2)).exp()))
}

/// Trains a model from a fresh seed-deterministic initialization.
pub fn train(
    data: &Dataset,
    arch: &Architecture,
    config: &TrainingConfig,
) -> Result<(Model, TrainingReport)> {
    train_from(data, arch, config, None)
}

/// Trains a model, optionally resuming from existing parameters (used
/// for polishing, which retrains with new gamma weights).
pub fn train_from(
    data: &Dataset,
    arch: &Architecture,
    config: &TrainingConfig,
    initial: Option<Parameters>,
) -> Result<(Model, TrainingReport)> {
    config.validate()?;
    if arch.num_inputs() != data.num_inputs() || arch.num_outputs() != data.num_outputs() {
        return Err(JennError::ShapeMismatch(format!(
            "architecture endpoints ({}, {}) do not match dataset ({}, {})",
            arch.num_inputs(),
            arch.num_outputs(),
            data.num_inputs(),
            data.num_outputs()
        )));
    }

    let stats = compute_normalization(data);
    let mut norm_data = normalize_dataset(data, &stats)?;
    if config.gamma_scale != 1.0 {
        norm_data.scale_gamma(config.gamma_scale);
    }

    let mut params = match initial {
        Some(p) => {
            if !p.matches(arch) {
                return Err(JennError::ShapeMismatch(
                    "initial parameters do not match architecture".into(),
                ));
            }
            p
        }
        None => init_parameters(arch, config.seed),
    };
    let mut state = OptimizerState::new(&params);
    let settings = config.update_settings();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);

    let m = data.num_examples();
    let mut cost_history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        match config.batch_size {
            BatchSize::Full => {
                let cache = forward_with_partials(arch, &params, &norm_data.x)?;
                let grads = backward(arch, &params, &cache, &norm_data, config.lambda)?;
                update_parameters(&mut params, &grads, &mut state, &settings)?;
            }
            BatchSize::Size(bs) => {
                let mut idx: Vec<usize> = (0..m).collect();
                idx.shuffle(&mut rng);
                for chunk in idx.chunks(bs.min(m)) {
                    let batch = norm_data.select_examples(chunk);
                    let cache = forward_with_partials(arch, &params, &batch.x)?;
                    let grads = backward(arch, &params, &cache, &batch, config.lambda)?;
                    update_parameters(&mut params, &grads, &mut state, &settings)?;
                }
            }
        }
        let cache = forward_with_partials(arch, &params, &norm_data.x)?;
        let c = cost(&params, &cache, &norm_data, config.lambda)?;
        if !c.is_finite() {
            return Err(JennError::Diverged { epoch });
        }
        cost_history.push(c);
    }

    let final_cost = cost_history.last().copied().unwrap_or(f64::NAN);
    let epochs_run = cost_history.len();
    let model = Model::new(arch.clone(), params, stats)?;
    Ok((model, TrainingReport { cost_history, final_cost, epochs_run }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn make_data(n_x: usize, n_y: usize, m: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::RngExt;
        let x = Array2::from_shape_fn((n_x, m), |_| rng.random_range(-1.0..1.0));
        let y = Array2::from_shape_fn((n_y, m), |_| rng.random_range(-1.0..1.0));
        let j = Array3::from_shape_fn((n_y, n_x, m), |_| rng.random_range(-1.0..1.0));
        Dataset::with_jacobian(x, y, j).unwrap()
    }

    #[test]
    fn perfect_predictions_give_zero_loss() {
        let data = make_data(2, 1, 4, 0);
        let arch = Architecture::new(vec![2, 3, 1]).unwrap();
        let params = init_parameters(&arch, 1);
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        let mut exact = data.clone();
        exact.y = cache.output().clone();
        exact.j = cache.output_partials().clone();
        assert_eq!(loss(&cache, &exact).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_loss() {
        // One example, n_x = n_y = 1, value error 2, partial error 3:
        // L = 1/2*4 + 1/2*9 = 6.5.
        let data = Dataset::with_jacobian(
            array![[0.0]],
            array![[1.0]],
            Array3::from_elem((1, 1, 1), 2.0),
        )
        .unwrap();
        let arch = Architecture::new(vec![1, 1]).unwrap();
        let mut params = Parameters::zeros(&arch);
        params.weights[0][[0, 0]] = 5.0; // a' = 5, error 3
        params.biases[0][0] = 3.0; // a = 3, error 2
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        assert_relative_eq!(loss(&cache, &data).unwrap(), 6.5, epsilon = 1e-14);
    }

    #[test]
    fn gamma_zero_reduces_to_weighted_half_mse() {
        let mut data = make_data(2, 2, 5, 3);
        data.gamma.fill(0.0);
        let arch = Architecture::new(vec![2, 4, 2]).unwrap();
        let params = init_parameters(&arch, 2);
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        let l = loss(&cache, &data).unwrap();
        let mut expected = 0.0;
        for ((k, t), &av) in cache.output().indexed_iter() {
            expected += data.beta[[k, t]] * (av - data.y[[k, t]]).powi(2);
        }
        expected *= 0.5 / 5.0;
        assert_relative_eq!(l, expected, epsilon = 1e-14);
    }

    #[test]
    fn cost_adds_weight_penalty() {
        let data = Dataset::with_jacobian(
            array![[0.0]],
            array![[0.0]],
            Array3::zeros((1, 1, 1)),
        )
        .unwrap();
        let arch = Architecture::new(vec![1, 1]).unwrap();
        let mut params = Parameters::zeros(&arch);
        params.weights[0][[0, 0]] = 2.0;
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        let l = loss(&cache, &data).unwrap();
        let c0 = cost(&params, &cache, &data, 0.0).unwrap();
        let c1 = cost(&params, &cache, &data, 1.0).unwrap();
        assert_eq!(c0, l);
        assert_relative_eq!(c1 - l, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn cost_monotone_in_lambda() {
        let data = make_data(2, 1, 6, 9);
        let arch = Architecture::new(vec![2, 5, 1]).unwrap();
        let params = init_parameters(&arch, 4);
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for lambda in [0.0, 0.01, 0.1, 1.0, 10.0] {
            let c = cost(&params, &cache, &data, lambda).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn zero_weights_zero_lambda_zero_gradients() {
        let mut data = make_data(2, 1, 4, 1);
        data.beta.fill(0.0);
        data.gamma.fill(0.0);
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        let params = init_parameters(&arch, 0);
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        let grads = backward(&arch, &params, &cache, &data, 0.0).unwrap();
        assert!(grads.d_weights.iter().all(|w| w.iter().all(|&v| v == 0.0)));
        assert!(grads.d_biases.iter().all(|b| b.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn single_linear_layer_matches_least_squares_gradient() {
        let mut data = make_data(3, 2, 7, 5);
        data.gamma.fill(0.0);
        let arch = Architecture::new(vec![3, 2]).unwrap();
        let params = init_parameters(&arch, 6);
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        let grads = backward(&arch, &params, &cache, &data, 0.0).unwrap();
        // Scalar-loop reference: dW = (1/m)(Yhat - Y) X^T.
        let m = data.num_examples();
        for s in 0..2 {
            for r in 0..3 {
                let mut expect = 0.0;
                for t in 0..m {
                    expect += (cache.output()[[s, t]] - data.y[[s, t]]) * data.x[[r, t]];
                }
                expect /= m as f64;
                assert_relative_eq!(grads.d_weights[0][[s, r]], expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn regularization_only_gradient() {
        let mut data = make_data(2, 1, 3, 8);
        data.beta.fill(0.0);
        data.gamma.fill(0.0);
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        let params = init_parameters(&arch, 7);
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        let lambda = 0.7;
        let grads = backward(&arch, &params, &cache, &data, lambda).unwrap();
        let m = data.num_examples() as f64;
        for l in 0..params.num_layers() {
            for (g, w) in grads.d_weights[l].iter().zip(params.weights[l].iter()) {
                assert_relative_eq!(*g, lambda / m * w, epsilon = 1e-15);
            }
            assert!(grads.d_biases[l].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let data = make_data(2, 2, 5, 12);
        let arch = Architecture::new(vec![2, 8, 8, 2]).unwrap();
        let params = init_parameters(&arch, 13);
        for lambda in [0.0, 0.1] {
            let err = gradient_check(&arch, &params, &data, lambda, 1e-6).unwrap();
            assert!(err < 1e-6, "gradient check error {err} at lambda {lambda}");
        }
    }

    #[test]
    fn gradient_check_error_shrinks_with_h() {
        let data = make_data(2, 1, 4, 20);
        let arch = Architecture::new(vec![2, 6, 1]).unwrap();
        let params = init_parameters(&arch, 21);
        let e_coarse = gradient_check(&arch, &params, &data, 0.0, 1e-2).unwrap();
        let e_mid = gradient_check(&arch, &params, &data, 0.0, 1e-3).unwrap();
        let e_fine = gradient_check(&arch, &params, &data, 0.0, 1e-5).unwrap();
        assert!(e_coarse > e_mid && e_mid > e_fine);
        // Central differences converge at second order; expect roughly
        // a 100x drop per 10x step reduction.
        let ratio = e_coarse / e_mid;
        assert!(ratio > 10.0 && ratio < 1000.0, "ratio {ratio}");
    }

    #[test]
    fn gradient_check_rejects_bad_step() {
        let data = make_data(1, 1, 2, 0);
        let arch = Architecture::new(vec![1, 1]).unwrap();
        let params = init_parameters(&arch, 0);
        assert!(gradient_check(&arch, &params, &data, 0.0, 0.0).is_err());
    }

    #[test]
    fn linear_one_by_one_gradient_is_near_exact() {
        let data = Dataset::values_only(array![[1.0, 2.0]], array![[3.0, 5.0]]).unwrap();
        let arch = Architecture::new(vec![1, 1]).unwrap();
        let params = init_parameters(&arch, 0);
        let err = gradient_check(&arch, &params, &data, 0.0, 1e-4).unwrap();
        assert!(err < 1e-9, "error {err}");
    }

    #[test]
    fn gamma_zero_is_bitwise_independent_of_jacobian_contents() {
        let mut a = make_data(2, 1, 5, 30);
        a.gamma.fill(0.0);
        let mut b = a.clone();
        b.j.mapv_inplace(|v| v * -17.5 + 3.0);

        let arch = Architecture::new(vec![2, 6, 1]).unwrap();
        let config = TrainingConfig { epochs: 30, ..Default::default() };
        let (ma, ra) = train(&a, &arch, &config).unwrap();
        let (mb, rb) = train(&b, &arch, &config).unwrap();
        assert_eq!(ma.parameters(), mb.parameters());
        assert_eq!(ra.cost_history, rb.cost_history);
    }

    #[test]
    fn beta_gamma_scaling_scales_loss_and_gradients() {
        let data = make_data(2, 1, 4, 31);
        let mut scaled = data.clone();
        let c = 2.0; // power of two keeps the scaling exact in floating point
        scaled.beta.mapv_inplace(|v| v * c);
        scaled.gamma.mapv_inplace(|v| v * c);

        let arch = Architecture::new(vec![2, 5, 1]).unwrap();
        let params = init_parameters(&arch, 32);
        let cache = forward_with_partials(&arch, &params, &data.x).unwrap();
        let l0 = loss(&cache, &data).unwrap();
        let l1 = loss(&cache, &scaled).unwrap();
        assert_eq!(l1, c * l0);

        let g0 = backward(&arch, &params, &cache, &data, 0.0).unwrap();
        let g1 = backward(&arch, &params, &cache, &scaled, 0.0).unwrap();
        for l in 0..params.num_layers() {
            for (a, b) in g0.d_weights[l].iter().zip(g1.d_weights[l].iter()) {
                assert_relative_eq!(c * a, *b, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn training_is_bitwise_reproducible() {
        let data = make_data(2, 1, 6, 40);
        let arch = Architecture::new(vec![2, 6, 1]).unwrap();
        let config = TrainingConfig {
            epochs: 25,
            batch_size: BatchSize::Size(2),
            ..Default::default()
        };
        let (m0, r0) = train(&data, &arch, &config).unwrap();
        let (m1, r1) = train(&data, &arch, &config).unwrap();
        assert_eq!(m0.parameters(), m1.parameters());
        assert_eq!(r0.cost_history, r1.cost_history);
    }

    #[test]
    fn zero_epochs_returns_initialized_model() {
        let data = make_data(1, 1, 3, 50);
        let arch = Architecture::new(vec![1, 4, 1]).unwrap();
        let config = TrainingConfig { epochs: 0, ..Default::default() };
        let (model, report) = train(&data, &arch, &config).unwrap();
        assert!(report.cost_history.is_empty());
        assert_eq!(report.epochs_run, 0);
        assert_eq!(model.parameters(), &init_parameters(&arch, config.seed));
    }

    #[test]
    fn training_reduces_cost() {
        let data = make_data(1, 1, 8, 60);
        let arch = Architecture::new(vec![1, 8, 1]).unwrap();
        let config = TrainingConfig { epochs: 200, ..Default::default() };
        let (_, report) = train(&data, &arch, &config).unwrap();
        assert!(report.final_cost <= report.cost_history[0]);
    }

    #[test]
    fn divergence_reports_epoch() {
        let data = make_data(1, 1, 4, 70);
        let arch = Architecture::new(vec![1, 4, 1]).unwrap();
        let config = TrainingConfig {
            optimizer: OptimizerKind::Gd,
            alpha: 1e6,
            epochs: 50,
            ..Default::default()
        };
        match train(&data, &arch, &config) {
            Err(JennError::Diverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn polish_weights_formula() {
        let j = Array3::from_elem((1, 1, 1), 0.0);
        let cfg = PolishConfig { eta: 1000.0, epsilon: 0.1 };
        let g = polish_weights(&j, &cfg).unwrap();
        assert_eq!(g[[0, 0, 0]], 1001.0);

        let j = Array3::from_elem((1, 1, 1), 10.0);
        let g = polish_weights(&j, &cfg).unwrap();
        assert_relative_eq!(g[[0, 0, 0]], 1.0 + 1000.0 * (-1.0f64).exp(), epsilon = 1e-9);

        let off = PolishConfig { eta: 0.0, epsilon: 0.1 };
        let g = polish_weights(&j, &off).unwrap();
        assert_eq!(g[[0, 0, 0]], 1.0);
    }

    #[test]
    fn polish_weights_stay_in_range() {
        let j = Array3::from_shape_fn((2, 3, 10), |(k, j, t)| {
            (k as f64 - 1.0) * 7.0 + j as f64 * 0.3 - t as f64
        });
        let cfg = PolishConfig { eta: 50.0, epsilon: 0.5 };
        let g = polish_weights(&j, &cfg).unwrap();
        for ((idx, &gv), &jv) in g.indexed_iter().zip(j.iter()) {
            assert!(gv >= 1.0 && gv <= 51.0, "gamma {gv} at {idx:?}");
            if jv == 0.0 {
                assert_eq!(gv, 51.0);
            }
        }
    }

    #[test]
    fn gamma_scale_zero_matches_values_only_training() {
        let data = make_data(2, 1, 5, 80);
        let mut masked = data.clone();
        masked.gamma.fill(0.0);
        masked.j.fill(0.0);
        let arch = Architecture::new(vec![2, 5, 1]).unwrap();
        let config = TrainingConfig { epochs: 40, ..Default::default() };
        let off = TrainingConfig { gamma_scale: 0.0, ..config.clone() };
        let (m0, _) = train(&data, &arch, &off).unwrap();
        let (m1, _) = train(&masked, &arch, &config).unwrap();
        assert_eq!(m0.parameters(), m1.parameters());
    }
}

//! Forward propagation of activations and of their partials w.r.t. the
//! network inputs.
//!
//! Besides the usual `z = W a + b`, `a = g(z)` recursion, each layer
//! also propagates input sensitivities:
//!
//! - `z'_j = W a'_j` (no bias term)
//! - `a'_j = g'(z) .* z'_j`
//!
//! seeded at the input layer with `a'_j = e_j` (the identity, since
//! dx_i/dx_j is the Kronecker delta). The output layer's `a'` is the
//! predicted Jacobian in normalized units. The per-input loop over `j`
//! is the only loop that cannot be vectorized over examples.

use ndarray::{Array2, Array3, Axis};

use crate::error::{JennError, Result};
use crate::params::{Architecture, Parameters};

/// Per-layer activations retained for backpropagation.
///
/// Index 0 is the input layer: `a[0]` is X and `a_prime[0]` is the
/// replicated identity. `a_prime`/`z_prime` are empty unless the cache
/// came from [`forward_with_partials`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub a: Vec<Array2<f64>>,
    pub z: Vec<Array2<f64>>,
    pub a_prime: Vec<Array3<f64>>,
    pub z_prime: Vec<Array3<f64>>,
}

impl ForwardCache {
    pub fn has_partials(&self) -> bool {
        !self.a_prime.is_empty()
    }

    /// Normalized predictions, shape `(n_y, m)`.
    pub fn output(&self) -> &Array2<f64> {
        self.a.last().expect("cache has at least the input layer")
    }

    /// Normalized predicted Jacobian, shape `(n_y, n_x, m)`.
    pub fn output_partials(&self) -> &Array3<f64> {
        self.a_prime
            .last()
            .expect("cache was built without partials")
    }
}

fn check_input(arch: &Architecture, params: &Parameters, x: &Array2<f64>) -> Result<()> {
    if !params.matches(arch) {
        return Err(JennError::ShapeMismatch(
            "parameters do not match architecture".into(),
        ));
    }
    if x.nrows() != arch.num_inputs() {
        return Err(JennError::ShapeMismatch(format!(
            "input has {} rows, architecture expects {}",
            x.nrows(),
            arch.num_inputs()
        )));
    }
    Ok(())
}

/// Propagates activations only. `cache.output()` is the normalized
/// prediction for each input column.
pub fn forward(arch: &Architecture, params: &Parameters, x: &Array2<f64>) -> Result<ForwardCache> {
    check_input(arch, params, x)?;
    let mut a = vec![x.clone()];
    let mut z = vec![x.clone()];
    for l in 0..params.num_layers() {
        let zl = params.weights[l].dot(&a[l])
            + &params.biases[l].view().insert_axis(Axis(1));
        let al = arch.activation(l).eval(&zl);
        z.push(zl);
        a.push(al);
    }
    Ok(ForwardCache { a, z, a_prime: Vec::new(), z_prime: Vec::new() })
}

/// Propagates activations and their partials w.r.t. every input.
/// `cache.output_partials()` is the normalized predicted Jacobian.
pub fn forward_with_partials(
    arch: &Architecture,
    params: &Parameters,
    x: &Array2<f64>,
) -> Result<ForwardCache> {
    check_input(arch, params, x)?;
    let n_x = arch.num_inputs();
    let m = x.ncols();

    let mut a = vec![x.clone()];
    let mut z = vec![x.clone()];
    // dx_i/dx_j = delta_ij, replicated over examples.
    let mut seed = Array3::zeros((n_x, n_x, m));
    for i in 0..n_x {
        seed.index_axis_mut(Axis(0), i)
            .index_axis_mut(Axis(0), i)
            .fill(1.0);
    }
    let mut a_prime = vec![seed.clone()];
    let mut z_prime = vec![seed];

    for l in 0..params.num_layers() {
        let w = &params.weights[l];
        let act = arch.activation(l);
        let zl = w.dot(&a[l]) + &params.biases[l].view().insert_axis(Axis(1));
        let al = act.eval(&zl);
        let g_prime = act.prime_from_output(&al);

        let n_l = w.nrows();
        let mut zp = Array3::zeros((n_l, n_x, m));
        let mut ap = Array3::zeros((n_l, n_x, m));
        for j in 0..n_x {
            let zpj = w.dot(&a_prime[l].index_axis(Axis(1), j));
            ap.index_axis_mut(Axis(1), j).assign(&(&g_prime * &zpj));
            zp.index_axis_mut(Axis(1), j).assign(&zpj);
        }
        z.push(zl);
        a.push(al);
        z_prime.push(zp);
        a_prime.push(ap);
    }
    Ok(ForwardCache { a, z, a_prime, z_prime })
}

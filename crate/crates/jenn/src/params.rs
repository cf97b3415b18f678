//! Network architecture and learnable parameters.

use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activation::Activation;
use crate::error::{JennError, Result};

/// Layer sizes from input to output, e.g. `[2, 16, 16, 1]`. Hidden
/// layers use tanh, the output layer is linear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    layer_sizes: Vec<usize>,
}

impl Architecture {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(JennError::InvalidArgument(
                "architecture needs at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.iter().any(|&n| n == 0) {
            return Err(JennError::InvalidArgument(
                "all layer sizes must be >= 1".into(),
            ));
        }
        Ok(Architecture { layer_sizes })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn num_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of weighted layers (all but the input layer).
    pub fn num_weighted_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Activation of weighted layer `l` (0-based), linear for the last.
    pub fn activation(&self, l: usize) -> Activation {
        if l + 1 == self.num_weighted_layers() {
            Activation::Linear
        } else {
            Activation::Tanh
        }
    }

    /// Parses a spec string like `"2,16,16,1"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let sizes: Vec<usize> = spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| JennError::Parse(format!("bad layer size '{s}' in '{spec}'")))
            })
            .collect::<Result<_>>()?;
        Architecture::new(sizes)
    }
}

/// Weights and biases for each weighted layer. `weights[l]` has shape
/// `(n[l+1], n[l])` in `layer_sizes` indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Parameters {
    pub fn zeros(arch: &Architecture) -> Self {
        let sizes = arch.layer_sizes();
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 1..sizes.len() {
            weights.push(Array2::zeros((sizes[l], sizes[l - 1])));
            biases.push(Array1::zeros(sizes[l]));
        }
        Parameters { weights, biases }
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    /// Total scalar parameter count.
    pub fn count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn matches(&self, arch: &Architecture) -> bool {
        let sizes = arch.layer_sizes();
        self.weights.len() == sizes.len() - 1
            && self
                .weights
                .iter()
                .enumerate()
                .all(|(i, w)| w.dim() == (sizes[i + 1], sizes[i]))
            && self
                .biases
                .iter()
                .enumerate()
                .all(|(i, b)| b.len() == sizes[i + 1])
    }
}

/// Deterministic fan-in scaled initialization. Weights are uniform on
/// `[-sqrt(3/n_prev), sqrt(3/n_prev)]` so their variance is `1/n_prev`,
/// which keeps tanh pre-activations away from saturation. Biases start
/// at zero.
pub fn init_parameters(arch: &Architecture, seed: u64) -> Parameters {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = arch.layer_sizes();
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 1..sizes.len() {
        let fan_in = sizes[l - 1];
        let bound = (3.0 / fan_in as f64).sqrt();
        let w = Array2::from_shape_fn((sizes[l], fan_in), |_| rng.random_range(-bound..bound));
        weights.push(w);
        biases.push(Array1::zeros(sizes[l]));
    }
    Parameters { weights, biases }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_architecture_spec() {
        let arch = Architecture::parse("2,16,16,1").unwrap();
        assert_eq!(arch.layer_sizes(), &[2, 16, 16, 1]);
        assert_eq!(arch.num_inputs(), 2);
        assert_eq!(arch.num_outputs(), 1);
        assert!(Architecture::parse("2").is_err());
        assert!(Architecture::parse("2,0,1").is_err());
        assert!(Architecture::parse("2,x,1").is_err());
    }

    #[test]
    fn init_is_deterministic() {
        let arch = Architecture::new(vec![3, 8, 2]).unwrap();
        let a = init_parameters(&arch, 42);
        let b = init_parameters(&arch, 42);
        assert_eq!(a, b);
        let c = init_parameters(&arch, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn biases_start_at_zero() {
        let arch = Architecture::new(vec![3, 8, 2]).unwrap();
        let p = init_parameters(&arch, 0);
        assert!(p.biases.iter().all(|b| b.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn weight_variance_tracks_fan_in() {
        // 1000 weights drawn for fan-in 10: sample variance within 20%
        // of 1/10.
        let arch = Architecture::new(vec![10, 100, 1]).unwrap();
        let p = init_parameters(&arch, 7);
        let w = &p.weights[0];
        let n = w.len() as f64;
        let mean = w.sum() / n;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let expected = 1.0 / 10.0;
        assert!(
            (var - expected).abs() < 0.2 * expected,
            "variance {var} not within 20% of {expected}"
        );
    }
}

//! Gradient-enhanced neural networks for surrogate modeling.
//!
//! Dense multilayer perceptrons trained against both function values and
//! their partial derivatives by minimizing a Jacobian-augmented
//! least-squares cost. Includes design-of-experiments sampling, canonical
//! benchmark functions with analytic gradients, accuracy metrics, and a
//! box-constrained gradient optimizer for surrogate-based optimization.

pub mod activation;
pub mod benchmarks;
pub mod dataset;
pub mod error;
pub mod io;
pub mod model;
pub mod normalize;
pub mod optimizer;
pub mod params;
pub mod propagation;
pub mod sbo;
pub mod training;

pub use dataset::Dataset;
pub use error::{JennError, Result};
pub use model::Model;
pub use normalize::NormalizationStats;
pub use params::{Architecture, Parameters};
pub use training::{train, train_from, BatchSize, TrainingConfig, TrainingReport};

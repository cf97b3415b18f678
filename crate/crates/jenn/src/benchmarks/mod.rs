//! Canonical test functions, sampling, metrics, and the desk-scale
//! experiment harness.

mod experiments;
mod functions;
mod lhs;
mod metrics;

pub use experiments::{
    run_noisy_partials_study, run_runtime_scaling, run_validation_suite, ExperimentResult,
    NoisyPartialsConfig, NoisyPartialsPoint, RuntimeScalingConfig, RuntimeScalingResult,
    ValidationConfig,
};
pub use functions::{
    eval_test_function, finite_difference_partials, finite_difference_partials_fn,
    sample_function, TestFunction,
};
pub use lhs::lhs_sample;
pub use metrics::metrics;

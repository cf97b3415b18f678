//! Box-constrained surrogate-based optimization.
//!
//! A projected-gradient descent with Armijo backtracking drives either
//! the true objective or a trained surrogate (through
//! [`surrogate_objective`]). The method is deliberately first-order: the
//! study's point is whether the surrogate's predicted gradients are good
//! enough to steer a gradient-based optimizer.

use ndarray::Array2;

use crate::dataset::Dataset;
use crate::error::{JennError, Result};
use crate::model::Model;
use crate::params::Architecture;
use crate::training::{polish_weights, train, train_from, PolishConfig, TrainingConfig};

use crate::benchmarks::{eval_test_function, lhs_sample, sample_function, TestFunction};

/// Objective returning `(value, gradient)` at a point.
pub type Objective<'a> = Box<dyn Fn(&[f64]) -> Result<(f64, Vec<f64>)> + 'a>;

pub struct OptProblem<'a> {
    pub objective: Objective<'a>,
    /// Per-dimension `[lo, hi]` box.
    pub bounds: Vec<(f64, f64)>,
    pub x0: Vec<f64>,
}

impl<'a> OptProblem<'a> {
    pub fn validate(&self) -> Result<()> {
        if self.bounds.len() != self.x0.len() {
            return Err(JennError::ShapeMismatch(format!(
                "x0 has {} entries, bounds {}",
                self.x0.len(),
                self.bounds.len()
            )));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(JennError::InvalidArgument(format!(
                    "bad bounds [{lo}, {hi}] in dimension {i}"
                )));
            }
            if self.x0[i] < lo || self.x0[i] > hi {
                return Err(JennError::InvalidArgument(format!(
                    "x0[{i}] = {} outside [{lo}, {hi}]",
                    self.x0[i]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeSettings {
    /// Projected-gradient norm tolerance.
    pub gtol: f64,
    /// Step-length tolerance.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for MinimizeSettings {
    fn default() -> Self {
        MinimizeSettings { gtol: 1e-6, xtol: 1e-10, max_iter: 5000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct OptTrace {
    pub iterates: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub converged: bool,
    pub termination_reason: TerminationReason,
}

impl OptTrace {
    pub fn final_point(&self) -> &[f64] {
        self.iterates.last().expect("trace has at least x0")
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trace has at least x0")
    }
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Projected-gradient descent with Armijo backtracking.
///
/// Every iterate satisfies the bounds exactly, and accepted steps only
/// decrease the objective. Terminates on the projected-gradient norm,
/// on the step length, or at `max_iter`.
pub fn minimize(problem: &OptProblem, settings: &MinimizeSettings) -> Result<OptTrace> {
    problem.validate()?;
    let mut x = problem.x0.clone();
    project(&mut x, &problem.bounds);
    let (mut fx, mut gx) = (problem.objective)(&x)?;
    if !fx.is_finite() || gx.iter().any(|v| !v.is_finite()) {
        return Err(JennError::NonFinite {
            context: "objective at x0".into(),
            location: format!("{x:?}"),
        });
    }

    let mut iterates = vec![x.clone()];
    let mut values = vec![fx];
    let mut step = 1.0f64;
    const ARMIJO_C: f64 = 1e-4;
    const BACKTRACK: f64 = 0.5;

    let mut reason = TerminationReason::MaxIterations;
    for _ in 0..settings.max_iter {
        // Projected-gradient stationarity measure: ||P(x - g) - x||.
        let pg_norm = {
            let mut probe: Vec<f64> = x.iter().zip(&gx).map(|(xi, gi)| xi - gi).collect();
            project(&mut probe, &problem.bounds);
            probe
                .iter()
                .zip(&x)
                .map(|(p, xi)| (p - xi).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        if pg_norm < settings.gtol {
            reason = TerminationReason::GradientTolerance;
            break;
        }

        // Backtrack until the projected step satisfies Armijo decrease.
        let mut alpha = step;
        let mut accepted = None;
        while alpha > 1e-20 {
            let mut trial: Vec<f64> =
                x.iter().zip(&gx).map(|(xi, gi)| xi - alpha * gi).collect();
            project(&mut trial, &problem.bounds);
            let step_sq: f64 = trial
                .iter()
                .zip(&x)
                .map(|(t, xi)| (t - xi).powi(2))
                .sum();
            if step_sq == 0.0 {
                break;
            }
            let (ft, gt) = (problem.objective)(&trial)?;
            if ft.is_finite() && ft <= fx - ARMIJO_C / alpha * step_sq {
                accepted = Some((trial, ft, gt, step_sq.sqrt()));
                break;
            }
            alpha *= BACKTRACK;
        }

        match accepted {
            Some((trial, ft, gt, step_len)) => {
                x = trial;
                fx = ft;
                gx = gt;
                iterates.push(x.clone());
                values.push(fx);
                // Let the step grow again after a successful move.
                step = (alpha * 2.0).min(1e8);
                if step_len < settings.xtol {
                    reason = TerminationReason::StepTolerance;
                    break;
                }
            }
            None => {
                reason = TerminationReason::StepTolerance;
                break;
            }
        }
    }

    let converged = reason != TerminationReason::MaxIterations;
    Ok(OptTrace { iterates, values, converged, termination_reason: reason })
}

/// Wraps a single-output model's prediction as an `(value, gradient)`
/// objective in raw units.
pub fn surrogate_objective(model: &Model) -> Result<Objective<'_>> {
    if model.architecture().num_outputs() != 1 {
        return Err(JennError::InvalidArgument(format!(
            "surrogate objective needs n_y = 1, model has {}",
            model.architecture().num_outputs()
        )));
    }
    let n_x = model.architecture().num_inputs();
    Ok(Box::new(move |x: &[f64]| {
        if x.len() != n_x {
            return Err(JennError::ShapeMismatch(format!(
                "point has {} entries, model expects {n_x}",
                x.len()
            )));
        }
        let col = Array2::from_shape_vec((n_x, 1), x.to_vec()).expect("length checked");
        let (y, j) = model.predict(&col)?;
        let grad: Vec<f64> = (0..n_x).map(|jj| j[[0, jj, 0]]).collect();
        Ok((y[[0, 0]], grad))
    }))
}

#[derive(Debug, Clone)]
pub struct RosenbrockStudyConfig {
    pub seed: u64,
    pub epochs: usize,
    /// The polishing stage runs longer at a smaller rate: the amplified
    /// gamma weights need fine steps to settle the flat valley.
    pub polish_epochs: usize,
    pub polish_alpha: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub x0: Vec<f64>,
    pub max_iter: usize,
    /// Random starts per surrogate for the dispersion measure.
    pub dispersion_starts: usize,
}

impl Default for RosenbrockStudyConfig {
    fn default() -> Self {
        RosenbrockStudyConfig {
            seed: 0,
            epochs: 10000,
            polish_epochs: 30000,
            polish_alpha: 0.002,
            eta: 1000.0,
            epsilon: 0.1,
            x0: vec![-1.5, -1.0],
            max_iter: 200_000,
            dispersion_starts: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RosenbrockStudyResult {
    /// Traces keyed "true", "nn", "jenn", "jenn_polished".
    pub traces: Vec<(String, OptTrace)>,
    /// Euclidean distance of each final point to the optimum (1, 1),
    /// same order as `traces`.
    pub distances: Vec<f64>,
    /// Mean distance of final points to their centroid over the random
    /// starts, per surrogate (same order as `traces`, skipping "true").
    /// Spread here indicates artificial local minima in the surrogate.
    pub dispersion: Vec<(String, f64)>,
}

impl RosenbrockStudyResult {
    pub fn distance(&self, name: &str) -> Option<f64> {
        self.traces
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| self.distances[i])
    }
}

/// Regular `side x side` grid over the box, as point columns.
fn regular_grid(bounds: &[(f64, f64)], side: usize) -> Array2<f64> {
    let dims = bounds.len();
    let n = side.pow(dims as u32);
    let mut pts = Array2::zeros((dims, n));
    for t in 0..n {
        let mut rem = t;
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            let i = rem % side;
            rem /= side;
            pts[[d, t]] = lo + (hi - lo) * i as f64 / (side - 1) as f64;
        }
    }
    pts
}

/// Trains NN, gradient-enhanced, and polished surrogates of the 2-D
/// Rosenbrock function on a 9x9 grid plus 100 LHS points, then runs the
/// box-constrained optimizer on the true function and all three
/// surrogates.
pub fn run_rosenbrock_study(config: &RosenbrockStudyConfig) -> Result<RosenbrockStudyResult> {
    let f = TestFunction::Rosenbrock2d;
    let bounds = f.bounds();

    let grid = regular_grid(&bounds, 9);
    let lhs = lhs_sample(100, &bounds, config.seed)?;
    let mut pts = Array2::zeros((2, grid.ncols() + lhs.ncols()));
    pts.slice_mut(ndarray::s![.., ..grid.ncols()]).assign(&grid);
    pts.slice_mut(ndarray::s![.., grid.ncols()..]).assign(&lhs);
    let (y, j) = sample_function(f, &pts)?;
    let data = Dataset::with_jacobian(pts, y, j)?;

    let arch = Architecture::new(vec![2, 24, 24, 1])?;
    let base = TrainingConfig {
        alpha: 0.01,
        epochs: config.epochs,
        seed: config.seed,
        ..Default::default()
    };

    let (jenn, _) = train(&data, &arch, &base)?;
    let nn_config = TrainingConfig { gamma_scale: 0.0, ..base.clone() };
    let (nn, _) = train(&data, &arch, &nn_config)?;

    // Polishing: reweight gamma around small raw slopes and resume from
    // the trained gradient-enhanced parameters.
    let polish = PolishConfig { eta: config.eta, epsilon: config.epsilon };
    let mut polished_data = data.clone();
    polished_data.gamma = polish_weights(&data.j, &polish)?;
    let polish_config = TrainingConfig {
        epochs: config.polish_epochs,
        alpha: config.polish_alpha,
        ..base.clone()
    };
    let (polished, _) = train_from(
        &polished_data,
        &arch,
        &polish_config,
        Some(jenn.parameters().clone()),
    )?;

    let settings = MinimizeSettings { max_iter: config.max_iter, ..Default::default() };
    let mut traces = Vec::new();

    let true_problem = OptProblem {
        objective: Box::new(|x: &[f64]| eval_test_function(f, x)),
        bounds: bounds.clone(),
        x0: config.x0.clone(),
    };
    traces.push(("true".to_string(), minimize(&true_problem, &settings)?));

    let mut dispersion = Vec::new();
    let starts = lhs_sample(config.dispersion_starts.max(1), &bounds, config.seed ^ 0x5eed)?;
    for (name, model) in [("nn", &nn), ("jenn", &jenn), ("jenn_polished", &polished)] {
        let problem = OptProblem {
            objective: surrogate_objective(model)?,
            bounds: bounds.clone(),
            x0: config.x0.clone(),
        };
        traces.push((name.to_string(), minimize(&problem, &settings)?));

        // Artificial-local-minima measure: spread of final points over
        // random starts.
        let mut finals = Vec::new();
        for s in 0..starts.ncols() {
            let problem = OptProblem {
                objective: surrogate_objective(model)?,
                bounds: bounds.clone(),
                x0: starts.column(s).to_vec(),
            };
            finals.push(minimize(&problem, &settings)?.final_point().to_vec());
        }
        let n = finals.len() as f64;
        let centroid: Vec<f64> = (0..2)
            .map(|d| finals.iter().map(|p| p[d]).sum::<f64>() / n)
            .collect();
        let spread = finals
            .iter()
            .map(|p| {
                ((p[0] - centroid[0]).powi(2) + (p[1] - centroid[1]).powi(2)).sqrt()
            })
            .sum::<f64>()
            / n;
        dispersion.push((name.to_string(), spread));
    }

    let distances = traces
        .iter()
        .map(|(_, tr)| {
            let p = tr.final_point();
            ((p[0] - 1.0).powi(2) + (p[1] - 1.0).powi(2)).sqrt()
        })
        .collect();
    Ok(RosenbrockStudyResult { traces, distances, dispersion })
}

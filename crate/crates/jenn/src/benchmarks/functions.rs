//! Benchmark functions with analytic gradients.

use ndarray::{Array2, Array3};
use std::f64::consts::PI;

use crate::error::{JennError, Result};

/// Single-output test functions used across the validation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `sin(x)` on `[-pi, pi]`.
    Sin,
    /// `x sin(x)` on `[-pi, pi]`.
    XSinX,
    /// 2-D Rastrigin `sum(x_i^2 - 10 cos(2 pi x_i) + 10)` on `[-2, 2]^2`.
    Rastrigin2d,
    /// 2-D Rosenbrock `(1 - x1)^2 + 100 (x2 - x1^2)^2` on `[-2, 2]^2`.
    Rosenbrock2d,
}

impl TestFunction {
    pub fn num_inputs(&self) -> usize {
        match self {
            TestFunction::Sin | TestFunction::XSinX => 1,
            TestFunction::Rastrigin2d | TestFunction::Rosenbrock2d => 2,
        }
    }

    /// Per-dimension `[lo, hi]` domain bounds.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            TestFunction::Sin | TestFunction::XSinX => vec![(-PI, PI)],
            TestFunction::Rastrigin2d | TestFunction::Rosenbrock2d => {
                vec![(-2.0, 2.0), (-2.0, 2.0)]
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Sin => "sin",
            TestFunction::XSinX => "xsinx",
            TestFunction::Rastrigin2d => "rastrigin2d",
            TestFunction::Rosenbrock2d => "rosenbrock2d",
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = JennError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(TestFunction::Sin),
            "xsinx" => Ok(TestFunction::XSinX),
            "rastrigin2d" => Ok(TestFunction::Rastrigin2d),
            "rosenbrock2d" => Ok(TestFunction::Rosenbrock2d),
            other => Err(JennError::InvalidArgument(format!(
                "unknown test function '{other}'"
            ))),
        }
    }
}

/// Exact value and analytic gradient at a point.
pub fn eval_test_function(f: TestFunction, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    if x.len() != f.num_inputs() {
        return Err(JennError::ShapeMismatch(format!(
            "{} expects {} inputs, got {}",
            f.name(),
            f.num_inputs(),
            x.len()
        )));
    }
    Ok(match f {
        TestFunction::Sin => (x[0].sin(), vec![x[0].cos()]),
        TestFunction::XSinX => (x[0] * x[0].sin(), vec![x[0].sin() + x[0] * x[0].cos()]),
        TestFunction::Rastrigin2d => {
            let mut y = 0.0;
            let mut g = vec![0.0; 2];
            for (i, &xi) in x.iter().enumerate() {
                y += xi * xi - 10.0 * (2.0 * PI * xi).cos() + 10.0;
                g[i] = 2.0 * xi + 20.0 * PI * (2.0 * PI * xi).sin();
            }
            (y, g)
        }
        TestFunction::Rosenbrock2d => {
            let (x1, x2) = (x[0], x[1]);
            let y = (1.0 - x1).powi(2) + 100.0 * (x2 - x1 * x1).powi(2);
            let g = vec![
                -2.0 * (1.0 - x1) - 400.0 * x1 * (x2 - x1 * x1),
                200.0 * (x2 - x1 * x1),
            ];
            (y, g)
        }
    })
}

/// Evaluates values and analytic gradients at every column of `points`
/// (`n_x` rows, one column per point), returning `(Y, J)` shaped
/// `(1, m)` and `(1, n_x, m)`.
pub fn sample_function(f: TestFunction, points: &Array2<f64>) -> Result<(Array2<f64>, Array3<f64>)> {
    let n_x = f.num_inputs();
    let m = points.ncols();
    if points.nrows() != n_x {
        return Err(JennError::ShapeMismatch(format!(
            "points have {} rows, {} expects {n_x}",
            points.nrows(),
            f.name()
        )));
    }
    let mut y = Array2::zeros((1, m));
    let mut j = Array3::zeros((1, n_x, m));
    for t in 0..m {
        let x: Vec<f64> = points.column(t).to_vec();
        let (v, g) = eval_test_function(f, &x)?;
        y[[0, t]] = v;
        for (jj, gv) in g.iter().enumerate() {
            j[[0, jj, t]] = *gv;
        }
    }
    Ok((y, j))
}

/// Central-difference partials of `f` at each point column, used to
/// manufacture noisy training Jacobians.
pub fn finite_difference_partials(
    f: TestFunction,
    points: &Array2<f64>,
    h: f64,
) -> Result<Array3<f64>> {
    finite_difference_partials_fn(|x| eval_test_function(f, x).map(|(y, _)| y), points, h)
}

/// Central-difference partials of an arbitrary scalar function.
pub fn finite_difference_partials_fn(
    f: impl Fn(&[f64]) -> Result<f64>,
    points: &Array2<f64>,
    h: f64,
) -> Result<Array3<f64>> {
    if h <= 0.0 {
        return Err(JennError::InvalidArgument("step h must be > 0".into()));
    }
    let n_x = points.nrows();
    let m = points.ncols();
    let mut j = Array3::zeros((1, n_x, m));
    for t in 0..m {
        let x: Vec<f64> = points.column(t).to_vec();
        for jj in 0..n_x {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[jj] += h;
            xm[jj] -= h;
            j[[0, jj, t]] = (f(&xp)? - f(&xm)?) / (2.0 * h);
        }
    }
    Ok(j)
}

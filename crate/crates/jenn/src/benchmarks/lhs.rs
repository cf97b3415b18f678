//! Latin hypercube sampling.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{JennError, Result};

/// Draws `n` points in the box `bounds` (one `(lo, hi)` pair per
/// dimension) with exactly one point per equal-width stratum in each
/// dimension. Deterministic per seed. Points are returned as columns of
/// an `(n_dims, n)` matrix.
pub fn lhs_sample(n: usize, bounds: &[(f64, f64)], seed: u64) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(JennError::InvalidArgument("need at least one sample".into()));
    }
    if bounds.is_empty() {
        return Err(JennError::InvalidArgument("need at least one dimension".into()));
    }
    for &(lo, hi) in bounds {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(JennError::DegenerateData(format!(
                "bad bounds [{lo}, {hi}]"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = bounds.len();
    let mut points = Array2::zeros((dims, n));
    let mut strata: Vec<usize> = (0..n).collect();
    for (d, &(lo, hi)) in bounds.iter().enumerate() {
        strata.shuffle(&mut rng);
        let width = (hi - lo) / n as f64;
        for (t, &k) in strata.iter().enumerate() {
            let u: f64 = rng.random_range(0.0..1.0);
            points[[d, t]] = lo + (k as f64 + u) * width;
        }
    }
    Ok(points)
}

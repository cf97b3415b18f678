//! Randomized property tests for sampling, normalization, and parsing.

use ndarray::{Array2, Array3};
use proptest::prelude::*;

use jenn::benchmarks::lhs_sample;
use jenn::normalize::{compute_normalization, denormalize_prediction, normalize_dataset};
use jenn::{Architecture, Dataset};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Each dimension of a Latin hypercube design hits every stratum
    /// exactly once, and every point stays inside the bounds.
    #[test]
    fn lhs_is_stratified_and_in_bounds(
        n in 1usize..40,
        seed in any::<u64>(),
        lo in -5.0f64..0.0,
        width in 0.5f64..10.0,
    ) {
        let bounds = [(lo, lo + width), (0.0, 1.0)];
        let pts = lhs_sample(n, &bounds, seed).unwrap();
        for (d, &(a, b)) in bounds.iter().enumerate() {
            let mut seen = vec![false; n];
            for t in 0..n {
                let v = pts[[d, t]];
                prop_assert!((a..=b).contains(&v));
                let s = (((v - a) / (b - a) * n as f64) as usize).min(n - 1);
                prop_assert!(!seen[s], "two samples in stratum {s} of dim {d}");
                seen[s] = true;
            }
        }
    }

    /// Normalizing then denormalizing a dataset recovers the original
    /// values and Jacobian up to rounding.
    #[test]
    fn normalization_round_trips(
        raw in prop::collection::vec(-100.0f64..100.0, 4 * 5),
        jac in prop::collection::vec(-10.0f64..10.0, 2 * 2 * 5),
    ) {
        let x = Array2::from_shape_vec((2, 5), raw[..10].to_vec()).unwrap();
        let y = Array2::from_shape_vec((2, 5), raw[10..].to_vec()).unwrap();
        let j = Array3::from_shape_vec((2, 2, 5), jac).unwrap();
        let data = Dataset::with_jacobian(x, y, j).unwrap();
        let stats = compute_normalization(&data);
        let norm = normalize_dataset(&data, &stats).unwrap();
        let (y_back, j_back) = denormalize_prediction(&norm.y, &norm.j, &stats).unwrap();
        for (a, b) in y_back.iter().zip(data.y.iter()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
        for (a, b) in j_back.iter().zip(data.j.iter()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    /// An architecture spec string parses back to the same layer sizes.
    #[test]
    fn architecture_spec_round_trips(
        sizes in prop::collection::vec(1usize..64, 2..6),
    ) {
        let spec = sizes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let arch = Architecture::parse(&spec).unwrap();
        prop_assert_eq!(arch.layer_sizes(), &sizes[..]);
    }
}

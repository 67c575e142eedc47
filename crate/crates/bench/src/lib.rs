//! Shared fixtures for the solver benchmarks.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ncpath_core::loss::{DesignData, LossModel};

/// Seeded dense least-squares instance.
pub fn ls_instance(seed: u64, n: usize, d: usize) -> LossModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
    let mut beta = Array1::zeros(d);
    for j in 0..(d / 10).max(1) {
        beta[j] = if rng.random_bool(0.5) { 2.0 } else { -2.0 };
    }
    let noise: Array1<f64> = Array1::from_shape_fn(n, |_| rng.random_range(-0.5..0.5));
    let y = x.dot(&beta) + &noise;
    LossModel::least_squares(DesignData::new(x, y).unwrap())
}

/// Seeded sample matrix for the rank-based covariance pipeline.
pub fn sample_matrix(seed: u64, n: usize, p: usize) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, p), |_| rng.random_range(-2.0..2.0))
}

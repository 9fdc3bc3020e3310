//! Synthetic dataset: a sum of two axis-aligned sine waves observed only
//! inside an L-shaped corner of the unit square.
//!
//! Local interpolation cannot recover the far corner of the square from
//! these observations; a model that discovers the additive structure
//! can. Train targets carry Gaussian noise, the test grid is noiseless
//! ground truth so MSE against it measures recovery directly.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Ground truth f(x₁, x₂) = sin(2πx₁) + sin(2πx₂).
pub fn axis_sines_truth(x1: f64, x2: f64) -> f64 {
    (2.0 * std::f64::consts::PI * x1).sin() + (2.0 * std::f64::consts::PI * x2).sin()
}

/// The L-shaped training region: within 0.3 of either axis.
pub fn in_l_region(x1: f64, x2: f64) -> bool {
    (0.0..=1.0).contains(&x1) && (0.0..=1.0).contains(&x2) && (x1 <= 0.3 || x2 <= 0.3)
}

/// Generates the L-region experiment: `n_train` noisy observations
/// sampled uniformly from the L, and a noiseless `grid_size`² test grid
/// covering all of [0, 1]² including the far corner.
pub fn synth_axis_sines(
    n_train: usize,
    grid_size: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if n_train == 0 || grid_size < 2 {
        return Err(Error::invalid(
            "need at least one training point and a 2x2 test grid",
        ));
    }
    if !noise_sd.is_finite() || noise_sd < 0.0 {
        return Err(Error::invalid(format!(
            "noise standard deviation must be nonnegative, got {noise_sd}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = Some(vec!["x1".to_string(), "x2".to_string(), "y".to_string()]);

    let mut train_inputs = DMatrix::zeros(n_train, 2);
    let mut train_targets = DVector::zeros(n_train);
    for i in 0..n_train {
        // Rejection sampling from the unit square; the L covers 51% of it.
        let (x1, x2) = loop {
            let x1: f64 = rng.random_range(0.0..1.0);
            let x2: f64 = rng.random_range(0.0..1.0);
            if in_l_region(x1, x2) {
                break (x1, x2);
            }
        };
        train_inputs[(i, 0)] = x1;
        train_inputs[(i, 1)] = x2;
        let noise: f64 = rng.sample(StandardNormal);
        train_targets[i] = axis_sines_truth(x1, x2) + noise_sd * noise;
    }

    let m = grid_size * grid_size;
    let mut test_inputs = DMatrix::zeros(m, 2);
    let mut test_targets = DVector::zeros(m);
    let step = 1.0 / (grid_size - 1) as f64;
    for i in 0..grid_size {
        for j in 0..grid_size {
            let row = i * grid_size + j;
            let x1 = i as f64 * step;
            let x2 = j as f64 * step;
            test_inputs[(row, 0)] = x1;
            test_inputs[(row, 1)] = x2;
            test_targets[row] = axis_sines_truth(x1, x2);
        }
    }

    Ok((
        Dataset::new(train_inputs, train_targets, names.clone())?,
        Dataset::new(test_inputs, test_targets, names)?,
    ))
}

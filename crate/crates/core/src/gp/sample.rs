//! Prior function draws.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gp::gram::gram_sym;
use crate::gp::kernel_model::GpKernel;

/// Draws `count` functions from the zero-mean prior at the given input
/// rows: samples of N(0, K + 1e−10·I), deterministic per seed.
pub fn sample_prior(
    kernel: &GpKernel,
    x: &DMatrix<f64>,
    seed: u64,
    count: usize,
) -> Result<Vec<DVector<f64>>> {
    let n = x.nrows();
    let mut k = gram_sym(x, kernel)?;
    for i in 0..n {
        k[(i, i)] += 1e-10;
    }
    let chol = nalgebra::Cholesky::new(k).ok_or(Error::CholeskyFailed {
        attempted_jitter: vec![1e-10],
    })?;
    let l = chol.l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        let white = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        draws.push(&l * white);
    }
    Ok(draws)
}

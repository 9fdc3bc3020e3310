//! The negative log marginal likelihood and its gradient.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gp::gram::gram_with_grads;
use crate::gp::kernel_model::GpKernel;

pub(crate) const LN_2PI: f64 = 1.8378770664093453;

/// Cholesky factorization with escalating diagonal jitter: starts at
/// 1e−10 of the mean diagonal, multiplies by 10 on failure, gives up
/// past 1e−4 of the mean diagonal.
pub(crate) struct FactorizedCovariance {
    pub chol: Cholesky<f64, Dyn>,
    pub jitter: f64,
}

pub(crate) fn factorize_covariance(k_y: &DMatrix<f64>) -> Result<FactorizedCovariance> {
    let n = k_y.nrows();
    let mean_diag = k_y.diagonal().sum() / n as f64;
    let mut attempted = Vec::new();
    for exponent in -10i32..=-4 {
        let jitter = mean_diag * 10f64.powi(exponent);
        attempted.push(jitter);
        let mut jittered = k_y.clone();
        for i in 0..n {
            jittered[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(jittered) {
            return Ok(FactorizedCovariance { chol, jitter });
        }
    }
    Err(Error::CholeskyFailed {
        attempted_jitter: attempted,
    })
}

/// Factorization with a fixed, already-known jitter (used when reloading
/// a persisted model, so the factor matches the one built at fit time).
pub(crate) fn factorize_with_fixed_jitter(
    k_y: &DMatrix<f64>,
    jitter: f64,
) -> Result<FactorizedCovariance> {
    let n = k_y.nrows();
    let mut jittered = k_y.clone();
    for i in 0..n {
        jittered[(i, i)] += jitter;
    }
    match Cholesky::new(jittered) {
        Some(chol) => Ok(FactorizedCovariance { chol, jitter }),
        None => Err(Error::CholeskyFailed {
            attempted_jitter: vec![jitter],
        }),
    }
}

pub(crate) fn log_det_from_factor(chol: &Cholesky<f64, Dyn>) -> f64 {
    chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0
}

/// 0.5·(y−μ)ᵀK_y⁻¹(y−μ) + 0.5·log|K_y| + (N/2)·log 2π with
/// K_y = K(θ) + σ_noise²·I (+ jitter), evaluated together with its
/// gradient in every packed hyperparameter.
///
/// `packed` holds the kernel's log hyperparameters followed by
/// log σ_noise²; `template` fixes the kernel family and shape. The
/// constant mean μ is the training-target mean, not an optimized
/// coordinate. The gradient uses the trace identity
/// ∂NLL/∂θ = 0.5·tr((K_y⁻¹ − ααᵀ)·∂K_y/∂θ) with α = K_y⁻¹(y−μ).
pub fn neg_log_marginal_likelihood(
    packed: &[f64],
    template: &GpKernel,
    data: &Dataset,
) -> Result<(f64, Vec<f64>)> {
    let n_kernel = template.n_params();
    if packed.len() != n_kernel + 1 {
        return Err(Error::invalid(format!(
            "expected {} packed parameters (kernel plus noise), got {}",
            n_kernel + 1,
            packed.len()
        )));
    }
    if packed.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("packed parameters must be finite"));
    }
    let kernel = template.with_packed(&packed[..n_kernel])?;
    let noise_variance = packed[n_kernel].exp();
    if !noise_variance.is_finite() || noise_variance <= 0.0 {
        return Err(Error::invalid(format!(
            "noise variance out of range: {noise_variance}"
        )));
    }

    let n = data.len();
    let mu = data.targets().sum() / n as f64;
    let (k, grads) = gram_with_grads(data.inputs(), &kernel, noise_variance)?;
    let mut k_y = k;
    for i in 0..n {
        k_y[(i, i)] += noise_variance;
    }
    let factor = factorize_covariance(&k_y)?;

    let residual = data.targets().map(|y| y - mu);
    let alpha = factor.chol.solve(&residual);
    let value = 0.5 * residual.dot(&alpha)
        + 0.5 * log_det_from_factor(&factor.chol)
        + 0.5 * n as f64 * LN_2PI;

    // W = K_y⁻¹ − ααᵀ contracts against every derivative matrix.
    let mut w = factor.chol.inverse();
    w.ger(-1.0, &alpha, &alpha, 1.0);
    let gradient = grads
        .iter()
        .map(|dk| 0.5 * w.component_mul(dk).sum())
        .collect();

    Ok((value, gradient))
}

/// Value, factorization, and dual weights for fixed hyperparameters;
/// shared by posterior fitting so both report identical likelihoods.
pub(crate) struct LikelihoodParts {
    pub value: f64,
    pub factor: FactorizedCovariance,
    pub alpha: DVector<f64>,
}

pub(crate) fn likelihood_parts(
    kernel: &GpKernel,
    noise_variance: f64,
    mu: f64,
    inputs: &DMatrix<f64>,
    targets: &DVector<f64>,
) -> Result<LikelihoodParts> {
    let n = inputs.nrows();
    let mut k_y = crate::gp::gram::gram_sym(inputs, kernel)?;
    for i in 0..n {
        k_y[(i, i)] += noise_variance;
    }
    let factor = factorize_covariance(&k_y)?;
    let residual = targets.map(|y| y - mu);
    let alpha = factor.chol.solve(&residual);
    let value = 0.5 * residual.dot(&alpha)
        + 0.5 * log_det_from_factor(&factor.chol)
        + 0.5 * n as f64 * LN_2PI;
    Ok(LikelihoodParts {
        value,
        factor,
        alpha,
    })
}

//! Hyperparameter optimization: log-space packing, L-BFGS with a strong
//! Wolfe line search, and seeded random restarts.

mod fit;
mod lbfgs;

pub use fit::{fit, fit_from_init, fit_with_template, DEFAULT_NOISE_VARIANCE};
pub use lbfgs::{lbfgs_minimize, LbfgsOutcome, Termination};

use crate::error::{Error, Result};
use crate::kernel::{AdditiveKernelSpec, LengthScales, OrderVariances};

/// Fitting protocol knobs. The defaults are the experiment protocol:
/// 500 L-BFGS iterations, five random restarts, interaction order
/// capped at min(D, 10).
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub gradient_tolerance: f64,
    pub memory_pairs: usize,
    /// Maximum interaction order; `None` means min(D, 10), and requests
    /// above D are clamped to D.
    pub max_order: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 500,
            restarts: 5,
            seed: 0,
            gradient_tolerance: 1e-6,
            memory_pairs: 10,
            max_order: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.gradient_tolerance.is_finite() || self.gradient_tolerance <= 0.0 {
            return Err(Error::invalid(format!(
                "gradient tolerance must be positive, got {}",
                self.gradient_tolerance
            )));
        }
        if self.memory_pairs == 0 {
            return Err(Error::invalid("memory_pairs must be at least 1"));
        }
        if self.max_order == Some(0) {
            return Err(Error::invalid("max_order must be at least 1"));
        }
        Ok(())
    }

    /// The interaction order to fit for an input dimension.
    pub fn effective_order(&self, dims: usize) -> usize {
        AdditiveKernelSpec::clamp_order(dims, self.max_order.unwrap_or(dims.min(10)))
    }
}

/// Unconstrained optimizer coordinates:
/// log l_1..log l_D, log σ_1²..log σ_R², log σ_noise².
#[derive(Debug, Clone, PartialEq)]
pub struct PackedParams(Vec<f64>);

impl PackedParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("packed parameters must be finite"));
        }
        Ok(PackedParams(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Flattens an additive spec plus noise variance into log space.
/// Exponentiation on the way back guarantees positivity, so the
/// optimizer runs unconstrained.
pub fn pack(spec: &AdditiveKernelSpec, noise_variance: f64) -> Result<PackedParams> {
    if !noise_variance.is_finite() || noise_variance <= 0.0 {
        return Err(Error::invalid(format!(
            "noise variance must be positive and finite, got {noise_variance}"
        )));
    }
    let mut values: Vec<f64> = spec
        .length_scales()
        .values()
        .iter()
        .map(|l| l.ln())
        .collect();
    values.extend(spec.order_variances().values().iter().map(|v| v.ln()));
    values.push(noise_variance.ln());
    PackedParams::new(values)
}

/// Inverse of [`pack`] for known shape (D, R); returns the spec and the
/// noise variance.
pub fn unpack(
    packed: &PackedParams,
    dims: usize,
    max_order: usize,
) -> Result<(AdditiveKernelSpec, f64)> {
    if packed.len() != dims + max_order + 1 {
        return Err(Error::invalid(format!(
            "expected {} packed values for D={dims}, R={max_order}, got {}",
            dims + max_order + 1,
            packed.len()
        )));
    }
    let values = packed.as_slice();
    let length_scales = LengthScales::new(values[..dims].iter().map(|v| v.exp()).collect())?;
    let order_variances = OrderVariances::new(
        values[dims..dims + max_order]
            .iter()
            .map(|v| v.exp())
            .collect(),
    )?;
    let spec = AdditiveKernelSpec::new(length_scales, order_variances)?;
    Ok((spec, values[dims + max_order].exp()))
}

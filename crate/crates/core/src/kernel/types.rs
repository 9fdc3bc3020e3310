//! Hyperparameter containers for the kernel family.

use crate::error::{Error, Result};

fn check_all_positive_finite(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{name} must not be empty")));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::invalid(format!(
                "{name}[{i}] must be positive and finite, got {v}"
            )));
        }
    }
    Ok(())
}

/// Per-dimension length-scales of the squared-exponential base kernels,
/// in the same units as the (standardized) input coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthScales(Vec<f64>);

impl LengthScales {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_all_positive_finite("length_scales", &values)?;
        Ok(LengthScales(values))
    }

    /// All length-scales equal to one.
    pub fn unit(dims: usize) -> Result<Self> {
        Self::new(vec![1.0; dims])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// The order variances σ₁²..σ_R²: σ_n² scales every interaction term of
/// order n, in squared target units.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderVariances(Vec<f64>);

impl OrderVariances {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_all_positive_finite("order_variances", &values)?;
        Ok(OrderVariances(values))
    }

    /// Equal split of unit signal variance over all orders.
    pub fn equal_split(max_order: usize) -> Result<Self> {
        if max_order == 0 {
            return Err(Error::invalid("max_order must be at least 1"));
        }
        Self::new(vec![1.0 / max_order as f64; max_order])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Which elementary-symmetric-polynomial evaluator to use.
///
/// The dynamic-programming recurrence is subtraction-free, so it cannot
/// cancel catastrophically when many base kernel values sit near one; it
/// is the default. The Newton-Girard recursion over power sums is kept
/// selectable for cross-checking results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EspMethod {
    #[default]
    Dp,
    NewtonGirard,
}

impl EspMethod {
    pub fn name(self) -> &'static str {
        match self {
            EspMethod::Dp => "dp",
            EspMethod::NewtonGirard => "newton-girard",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(EspMethod::Dp),
            "newton-girard" => Ok(EspMethod::NewtonGirard),
            other => Err(Error::invalid(format!(
                "unknown esp method {other:?}; expected \"dp\" or \"newton-girard\""
            ))),
        }
    }
}

/// Full hyperparameter set of the additive kernel: D length-scales plus
/// one variance per interaction order up to `max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveKernelSpec {
    dims: usize,
    max_order: usize,
    length_scales: LengthScales,
    order_variances: OrderVariances,
}

impl AdditiveKernelSpec {
    pub fn new(length_scales: LengthScales, order_variances: OrderVariances) -> Result<Self> {
        let dims = length_scales.len();
        let max_order = order_variances.len();
        if max_order > dims {
            return Err(Error::invalid(format!(
                "max_order {max_order} exceeds input dimension {dims}"
            )));
        }
        Ok(AdditiveKernelSpec {
            dims,
            max_order,
            length_scales,
            order_variances,
        })
    }

    /// Unit length-scales and an equal split of unit variance over
    /// `max_order` orders; the default starting point for fitting.
    pub fn default_init(dims: usize, max_order: usize) -> Result<Self> {
        Self::new(
            LengthScales::unit(dims)?,
            OrderVariances::equal_split(max_order)?,
        )
    }

    /// The usable interaction order for a requested maximum: orders above
    /// the input dimension contribute no terms, so the request is clamped
    /// to D (and D = 1 therefore forces first order only).
    pub fn clamp_order(dims: usize, requested: usize) -> usize {
        requested.max(1).min(dims)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn length_scales(&self) -> &LengthScales {
        &self.length_scales
    }

    pub fn order_variances(&self) -> &OrderVariances {
        &self.order_variances
    }
}

/// Hyperparameters of the product-form baseline kernel
/// v²·Π_d (1 + α·k_d): a single amplitude plus one interaction-decay
/// parameter α, which forces order-n terms to carry weight α^n.
#[derive(Debug, Clone, PartialEq)]
pub struct HullKernelSpec {
    amplitude: f64,
    alpha: f64,
    length_scales: LengthScales,
}

impl HullKernelSpec {
    pub fn new(amplitude: f64, alpha: f64, length_scales: LengthScales) -> Result<Self> {
        if !amplitude.is_finite() || amplitude <= 0.0 {
            return Err(Error::invalid(format!(
                "amplitude must be positive and finite, got {amplitude}"
            )));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::invalid(format!(
                "alpha must be nonnegative and finite, got {alpha}"
            )));
        }
        Ok(HullKernelSpec {
            amplitude,
            alpha,
            length_scales,
        })
    }

    pub fn dims(&self) -> usize {
        self.length_scales.len()
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn length_scales(&self) -> &LengthScales {
        &self.length_scales
    }
}

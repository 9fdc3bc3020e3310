//! The kernel families a GP model can carry.
//!
//! The additive family is the primary one; the squared-exponential ARD
//! kernel (the order-D special case with a single amplitude) and the
//! product-form hull kernel (geometric order weights) are carried as
//! baselines. All three expose the same surface: evaluation, analytic
//! gradients with respect to log hyperparameters, and flat packing of
//! those hyperparameters for the optimizer.

use crate::error::{Error, Result};
use crate::kernel::{
    additive_kernel_with_method, base_row, binomial, esp_excluding, hull_kernel,
    AdditiveKernelSpec, EspMethod, HullKernelSpec, LengthScales, OrderVariances,
};

#[derive(Debug, Clone, PartialEq)]
pub enum GpKernel {
    Additive {
        spec: AdditiveKernelSpec,
        method: EspMethod,
    },
    SquaredExp {
        length_scales: LengthScales,
        amplitude: f64,
    },
    Hull(HullKernelSpec),
}

impl From<AdditiveKernelSpec> for GpKernel {
    fn from(spec: AdditiveKernelSpec) -> Self {
        GpKernel::Additive {
            spec,
            method: EspMethod::default(),
        }
    }
}

impl GpKernel {
    pub fn squared_exp(length_scales: LengthScales, amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude <= 0.0 {
            return Err(Error::invalid(format!(
                "amplitude must be positive and finite, got {amplitude}"
            )));
        }
        Ok(GpKernel::SquaredExp {
            length_scales,
            amplitude,
        })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            GpKernel::Additive { .. } => "additive",
            GpKernel::SquaredExp { .. } => "squared-exp",
            GpKernel::Hull(_) => "hull",
        }
    }

    pub fn dims(&self) -> usize {
        match self {
            GpKernel::Additive { spec, .. } => spec.dims(),
            GpKernel::SquaredExp { length_scales, .. } => length_scales.len(),
            GpKernel::Hull(spec) => spec.dims(),
        }
    }

    /// Number of packed kernel hyperparameters (observation noise is
    /// packed separately by the objective).
    pub fn n_params(&self) -> usize {
        match self {
            GpKernel::Additive { spec, .. } => spec.dims() + spec.max_order(),
            GpKernel::SquaredExp { length_scales, .. } => length_scales.len() + 1,
            GpKernel::Hull(spec) => spec.dims() + 2,
        }
    }

    /// Highest interaction order the kernel sums over.
    pub fn max_order(&self) -> usize {
        match self {
            GpKernel::Additive { spec, .. } => spec.max_order(),
            GpKernel::SquaredExp { length_scales, .. } => length_scales.len(),
            GpKernel::Hull(spec) => spec.dims(),
        }
    }

    pub fn length_scales(&self) -> &LengthScales {
        match self {
            GpKernel::Additive { spec, .. } => spec.length_scales(),
            GpKernel::SquaredExp { length_scales, .. } => length_scales,
            GpKernel::Hull(spec) => spec.length_scales(),
        }
    }

    /// k(x, x) at zero lag, the prior variance of a function value.
    pub fn prior_variance(&self) -> f64 {
        match self {
            GpKernel::Additive { spec, .. } => {
                let d = spec.dims();
                spec.order_variances()
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(n, &v)| v * binomial(d, n + 1))
                    .sum()
            }
            GpKernel::SquaredExp { amplitude, .. } => *amplitude,
            GpKernel::Hull(spec) => {
                spec.amplitude() * (1.0 + spec.alpha()).powi(spec.dims() as i32)
            }
        }
    }

    /// The variance multiplying one interaction term of the given order:
    /// σ_n² for the additive family, v²·αⁿ for the hull, and the
    /// amplitude for the squared-exponential (whose only term is order D).
    pub fn term_coefficient(&self, order: usize) -> Result<f64> {
        if order == 0 {
            return Err(Error::invalid("interaction order must be at least 1"));
        }
        match self {
            GpKernel::Additive { spec, .. } => {
                if order > spec.max_order() {
                    return Err(Error::invalid(format!(
                        "order {order} exceeds the kernel's maximum order {}",
                        spec.max_order()
                    )));
                }
                Ok(spec.order_variances().values()[order - 1])
            }
            GpKernel::SquaredExp {
                length_scales,
                amplitude,
            } => {
                if order != length_scales.len() {
                    return Err(Error::invalid(format!(
                        "squared-exp kernel has a single term of order {}, asked for {order}",
                        length_scales.len()
                    )));
                }
                Ok(*amplitude)
            }
            GpKernel::Hull(spec) => {
                if order > spec.dims() {
                    return Err(Error::invalid(format!(
                        "order {order} exceeds input dimension {}",
                        spec.dims()
                    )));
                }
                Ok(spec.amplitude() * spec.alpha().powi(order as i32))
            }
        }
    }

    /// Normalized percentage of prior variance contributed by each
    /// interaction order (order n's weight is its term coefficient times
    /// the C(D, n) terms of that order).
    pub fn order_shares(&self) -> Vec<f64> {
        let d = self.dims();
        let weights: Vec<f64> = (1..=self.max_order())
            .map(|n| self.term_coefficient(n).map_or(0.0, |c| c * binomial(d, n)))
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter().map(|w| 100.0 * w / total).collect()
    }

    pub fn eval(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        match self {
            GpKernel::Additive { spec, method } => {
                additive_kernel_with_method(x, x_prime, spec, *method)
            }
            GpKernel::SquaredExp {
                length_scales,
                amplitude,
            } => {
                let z = base_row(x, x_prime, length_scales)?;
                Ok(amplitude * z.iter().product::<f64>())
            }
            GpKernel::Hull(spec) => hull_kernel(x, x_prime, spec),
        }
    }

    /// Kernel value plus its gradient with respect to every packed log
    /// hyperparameter, written into `grads` (length [`Self::n_params`]).
    pub fn eval_with_grads(&self, x: &[f64], x_prime: &[f64], grads: &mut [f64]) -> Result<f64> {
        if grads.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "gradient buffer holds {}, kernel has {} parameters",
                grads.len(),
                self.n_params()
            )));
        }
        match self {
            GpKernel::Additive { spec, method } => {
                let d = spec.dims();
                let r = spec.max_order();
                let ls = spec.length_scales().values();
                let sigmas = spec.order_variances().values();
                let z = base_row(x, x_prime, spec.length_scales())?;
                let esp = crate::kernel::additive::esp_with_method(&z, r, *method)?;
                let value = crate::kernel::additive::weighted_order_sum(&esp, sigmas);
                for dim in 0..d {
                    let excluded = esp_excluding(&z, &esp, dim, r - 1)?;
                    let dk_dz =
                        crate::kernel::additive::weighted_order_sum_shifted(&excluded, sigmas);
                    let diff = x[dim] - x_prime[dim];
                    grads[dim] = dk_dz * z[dim] * diff * diff / (ls[dim] * ls[dim]);
                }
                for n in 0..r {
                    grads[d + n] = sigmas[n] * esp.order(n + 1);
                }
                Ok(value)
            }
            GpKernel::SquaredExp {
                length_scales,
                amplitude,
            } => {
                let d = length_scales.len();
                let ls = length_scales.values();
                let z = base_row(x, x_prime, length_scales)?;
                let value = amplitude * z.iter().product::<f64>();
                for dim in 0..d {
                    let diff = x[dim] - x_prime[dim];
                    grads[dim] = value * diff * diff / (ls[dim] * ls[dim]);
                }
                grads[d] = value;
                Ok(value)
            }
            GpKernel::Hull(spec) => {
                let d = spec.dims();
                let ls = spec.length_scales().values();
                let alpha = spec.alpha();
                let z = base_row(x, x_prime, spec.length_scales())?;
                let mut value = spec.amplitude();
                for &zi in &z {
                    value *= 1.0 + alpha * zi;
                }
                let mut alpha_sum = 0.0;
                for dim in 0..d {
                    let factor = 1.0 + alpha * z[dim];
                    let diff = x[dim] - x_prime[dim];
                    grads[dim] = value * alpha * z[dim] * diff * diff / (ls[dim] * ls[dim]) / factor;
                    alpha_sum += z[dim] / factor;
                }
                grads[d] = value;
                grads[d + 1] = value * alpha * alpha_sum;
                Ok(value)
            }
        }
    }

    /// Flattened log hyperparameters: log length-scales first, then the
    /// family's variance parameters.
    pub fn pack(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .length_scales()
            .values()
            .iter()
            .map(|l| l.ln())
            .collect();
        match self {
            GpKernel::Additive { spec, .. } => {
                out.extend(spec.order_variances().values().iter().map(|v| v.ln()));
            }
            GpKernel::SquaredExp { amplitude, .. } => out.push(amplitude.ln()),
            GpKernel::Hull(spec) => {
                out.push(spec.amplitude().ln());
                out.push(spec.alpha().ln());
            }
        }
        out
    }

    /// Rebuilds a kernel of the same family and shape from packed log
    /// hyperparameters.
    pub fn with_packed(&self, packed: &[f64]) -> Result<GpKernel> {
        if packed.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "expected {} packed parameters, got {}",
                self.n_params(),
                packed.len()
            )));
        }
        let d = self.dims();
        let length_scales = LengthScales::new(packed[..d].iter().map(|v| v.exp()).collect())?;
        match self {
            GpKernel::Additive { method, .. } => {
                let variances =
                    OrderVariances::new(packed[d..].iter().map(|v| v.exp()).collect())?;
                Ok(GpKernel::Additive {
                    spec: AdditiveKernelSpec::new(length_scales, variances)?,
                    method: *method,
                })
            }
            GpKernel::SquaredExp { .. } => GpKernel::squared_exp(length_scales, packed[d].exp()),
            GpKernel::Hull(_) => Ok(GpKernel::Hull(HullKernelSpec::new(
                packed[d].exp(),
                packed[d + 1].exp(),
                length_scales,
            )?)),
        }
    }

    pub fn esp_method(&self) -> EspMethod {
        match self {
            GpKernel::Additive { method, .. } => *method,
            _ => EspMethod::default(),
        }
    }

    /// Same kernel with a different symmetric-polynomial evaluator
    /// (meaningful for the additive family only).
    pub fn with_esp_method(self, new_method: EspMethod) -> GpKernel {
        match self {
            GpKernel::Additive { spec, .. } => GpKernel::Additive {
                spec,
                method: new_method,
            },
            other => other,
        }
    }

    pub fn as_additive(&self) -> Option<&AdditiveKernelSpec> {
        match self {
            GpKernel::Additive { spec, .. } => Some(spec),
            _ => None,
        }
    }
}

//! One-dimensional base kernels, elementary symmetric polynomials, and
//! the additive kernel of all interaction orders with its analytic
//! derivatives.

pub(crate) mod additive;
mod base;
mod esp;
mod hull;
mod types;

pub use additive::{
    additive_kernel, additive_kernel_with_method, kernel_grad_length_scales,
    kernel_grad_order_variances,
};
pub use base::{base_kernel, base_row};
pub use esp::{esp_dp, esp_excluding, esp_newton_girard, power_sums, EspVector, PowerSums};
pub use hull::hull_kernel;
pub use types::{AdditiveKernelSpec, EspMethod, HullKernelSpec, LengthScales, OrderVariances};

/// Binomial coefficient as an `f64`. Exact for the ranges used here
/// (`n ≤ 20`), since every intermediate stays far below 2^53.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

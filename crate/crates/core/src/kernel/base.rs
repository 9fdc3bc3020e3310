//! One-dimensional squared-exponential base kernels.
//!
//! Base kernels have unit amplitude: all signal variance lives in the
//! order variances, otherwise per-dimension amplitudes would be
//! unidentifiable against them.

use crate::error::{Error, Result};
use crate::kernel::types::LengthScales;

/// `exp(−(x−x')²/(2l²))`, the Gaussian kernel in one dimension.
///
/// Always in `(0, 1]`, equal to one exactly when `x = x'`.
pub fn base_kernel(x: f64, x_prime: f64, length_scale: f64) -> Result<f64> {
    if !x.is_finite() || !x_prime.is_finite() {
        return Err(Error::invalid(format!(
            "base kernel inputs must be finite, got ({x}, {x_prime})"
        )));
    }
    if !length_scale.is_finite() || length_scale <= 0.0 {
        return Err(Error::invalid(format!(
            "length scale must be positive and finite, got {length_scale}"
        )));
    }
    Ok(base_kernel_unchecked(x, x_prime, length_scale))
}

#[inline]
pub(crate) fn base_kernel_unchecked(x: f64, x_prime: f64, length_scale: f64) -> f64 {
    let diff = x - x_prime;
    (-diff * diff / (2.0 * length_scale * length_scale)).exp()
}

/// Evaluates every dimension's base kernel, producing the vector
/// `z` with `z_i = k_i(x_i, x'_i)` consumed by the symmetric-polynomial
/// recursions.
pub fn base_row(x: &[f64], x_prime: &[f64], length_scales: &LengthScales) -> Result<Vec<f64>> {
    let dims = length_scales.len();
    if x.len() != dims || x_prime.len() != dims {
        return Err(Error::invalid(format!(
            "dimension mismatch: expected {dims}, got {} and {}",
            x.len(),
            x_prime.len()
        )));
    }
    let mut z = Vec::with_capacity(dims);
    for d in 0..dims {
        z.push(base_kernel(x[d], x_prime[d], length_scales.values()[d])?);
    }
    Ok(z)
}

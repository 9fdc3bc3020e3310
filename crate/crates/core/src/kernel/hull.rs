//! Product-form baseline kernel with geometric order weights.

use crate::error::Result;
use crate::kernel::base::base_row;
use crate::kernel::types::HullKernelSpec;

/// v²·Π_d (1 + α·k_d(x_d, x'_d)).
///
/// Expanding the product shows this equals v²·Σ_{n=0}^{D} α^n·e_n(z):
/// every order participates, but order n is forced to carry weight α^n
/// rather than a free variance. Evaluation is O(D).
pub fn hull_kernel(x: &[f64], x_prime: &[f64], spec: &HullKernelSpec) -> Result<f64> {
    let z = base_row(x, x_prime, spec.length_scales())?;
    let mut product = spec.amplitude();
    for &zi in &z {
        product *= 1.0 + spec.alpha() * zi;
    }
    Ok(product)
}

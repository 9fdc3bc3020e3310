//! The additive kernel of all interaction orders and its derivatives.

use crate::error::{Error, Result};
use crate::kernel::base::base_row;
use crate::kernel::esp::{esp_dp, esp_excluding, esp_newton_girard, EspVector};
use crate::kernel::types::{AdditiveKernelSpec, EspMethod};

pub(crate) fn esp_with_method(z: &[f64], r: usize, method: EspMethod) -> Result<EspVector> {
    match method {
        EspMethod::Dp => esp_dp(z, r),
        EspMethod::NewtonGirard => esp_newton_girard(z, r),
    }
}

/// k(x, x') = Σ_{n=1}^{R} σ_n²·e_n(z), with z the base kernel values.
///
/// At x = x' every z_i is one, so the value is Σ_n σ_n²·C(D, n), the
/// prior variance; with only σ_1² active the kernel collapses to the
/// plain sum of base kernels, and with only σ_D² active to the
/// D-dimensional squared-exponential product.
pub fn additive_kernel(x: &[f64], x_prime: &[f64], spec: &AdditiveKernelSpec) -> Result<f64> {
    additive_kernel_with_method(x, x_prime, spec, EspMethod::default())
}

/// Same kernel, explicit choice of symmetric-polynomial evaluator.
pub fn additive_kernel_with_method(
    x: &[f64],
    x_prime: &[f64],
    spec: &AdditiveKernelSpec,
    method: EspMethod,
) -> Result<f64> {
    let z = base_row(x, x_prime, spec.length_scales())?;
    let esp = esp_with_method(&z, spec.max_order(), method)?;
    Ok(weighted_order_sum(&esp, spec.order_variances().values()))
}

#[inline]
pub(crate) fn weighted_order_sum(esp: &EspVector, order_variances: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (n, &variance) in order_variances.iter().enumerate() {
        acc += variance * esp.order(n + 1);
    }
    acc
}

/// ∂k/∂σ_n² = e_n(z) for n = 1..R: the raw (not log-space) derivative
/// with respect to each order variance.
pub fn kernel_grad_order_variances(
    x: &[f64],
    x_prime: &[f64],
    spec: &AdditiveKernelSpec,
) -> Result<Vec<f64>> {
    let z = base_row(x, x_prime, spec.length_scales())?;
    let esp = esp_dp(&z, spec.max_order())?;
    Ok(esp.values()[1..].to_vec())
}

/// Gradient with respect to log l_d for every dimension d.
///
/// Removing dimension d from every polynomial term gives
/// ∂k/∂z_d = Σ_n σ_n²·e_{n−1} over z without z_d, and the
/// squared-exponential chain rule contributes
/// ∂z_d/∂(log l_d) = z_d·(x_d − x'_d)²/l_d².
pub fn kernel_grad_length_scales(
    x: &[f64],
    x_prime: &[f64],
    spec: &AdditiveKernelSpec,
) -> Result<Vec<f64>> {
    let z = base_row(x, x_prime, spec.length_scales())?;
    let r = spec.max_order();
    let esp = esp_dp(&z, r)?;
    let mut grad = Vec::with_capacity(spec.dims());
    for d in 0..spec.dims() {
        let excluded = esp_excluding(&z, &esp, d, r - 1)?;
        let dk_dz = weighted_order_sum_shifted(&excluded, spec.order_variances().values());
        let diff = x[d] - x_prime[d];
        let l = spec.length_scales().values()[d];
        grad.push(dk_dz * z[d] * diff * diff / (l * l));
    }
    Ok(grad)
}

/// Σ_n σ_n²·e_{n−1} over an exclusion vector (orders shifted down one).
#[inline]
pub(crate) fn weighted_order_sum_shifted(excluded: &EspVector, order_variances: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (n, &variance) in order_variances.iter().enumerate() {
        acc += variance * excluded.order(n);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::types::{LengthScales, OrderVariances};
    use crate::kernel::{base_kernel, binomial};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(dims: usize, max_order: usize) -> AdditiveKernelSpec {
        AdditiveKernelSpec::default_init(dims, max_order).unwrap()
    }

    fn spec_with(ls: Vec<f64>, ov: Vec<f64>) -> AdditiveKernelSpec {
        AdditiveKernelSpec::new(
            LengthScales::new(ls).unwrap(),
            OrderVariances::new(ov).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_lag_value_is_sum_of_binomials() {
        let spec = spec_with(vec![1.0; 4], vec![1.0; 4]);
        let x = [0.3, -1.0, 2.0, 0.0];
        let k = additive_kernel(&x, &x, &spec).unwrap();
        assert_eq!(k, 15.0); // 4 + 6 + 4 + 1

        // And it dominates every other evaluation.
        let y = [1.0, 0.0, -2.0, 0.7];
        assert!(additive_kernel(&x, &y, &spec).unwrap() < k);
    }

    #[test]
    fn first_order_only_is_sum_of_base_kernels() {
        let spec = spec_with(vec![0.8, 1.3, 0.5], vec![1.7e-1, 1e-300, 1e-300]);
        let x = [0.1, 0.2, -0.4];
        let y = [1.0, -0.3, 0.2];
        let k = additive_kernel(&x, &y, &spec).unwrap();
        let explicit: f64 = (0..3)
            .map(|d| base_kernel(x[d], y[d], spec.length_scales().values()[d]).unwrap())
            .sum();
        assert_relative_eq!(k, 1.7e-1 * explicit, max_relative = 1e-14);
    }

    #[test]
    fn top_order_only_is_gaussian_product() {
        let spec = spec_with(vec![0.9, 1.1], vec![1e-300, 0.6]);
        let x = [0.0, 1.0];
        let y = [0.9, 2.1]; // |Δ_d| = l_d in both dimensions
        let k = additive_kernel(&x, &y, &spec).unwrap();
        assert_relative_eq!(k, 0.6 * (-1.0f64).exp(), max_relative = 1e-13);
    }

    #[test]
    fn both_esp_methods_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let d = rng.random_range(1..=8);
            let spec = spec(d, d);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = additive_kernel_with_method(&x, &y, &spec, EspMethod::Dp).unwrap();
            let b = additive_kernel_with_method(&x, &y, &spec, EspMethod::NewtonGirard).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernel_is_symmetric_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d = rng.random_range(1..=6);
            let spec = spec(d, d);
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let a = additive_kernel(&x, &y, &spec).unwrap();
            let b = additive_kernel(&y, &x, &spec).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn order_variance_gradient_values() {
        let spec = spec(4, 4);
        let x = [0.5, -0.5, 1.0, 2.0];
        let grad = kernel_grad_order_variances(&x, &x, &spec).unwrap();
        assert_eq!(grad, vec![4.0, 6.0, 4.0, 1.0]);
        for g in grad {
            assert!(g >= 0.0);
        }

        let spec1 = spec_with(vec![0.7], vec![0.4]);
        let g = kernel_grad_order_variances(&[0.2], &[0.9], &spec1).unwrap();
        let z1 = base_kernel(0.2, 0.9, 0.7).unwrap();
        assert_eq!(g, vec![z1]);
    }

    #[test]
    fn order_variance_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = rng.random_range(1..=5);
            let ls: Vec<f64> = (0..d).map(|_| rng.random_range(0.4..2.0)).collect();
            let ov: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..1.5)).collect();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let spec = spec_with(ls.clone(), ov.clone());
            let grad = kernel_grad_order_variances(&x, &y, &spec).unwrap();
            let h = 1e-6;
            for n in 0..d {
                let mut up = ov.clone();
                up[n] += h;
                let mut down = ov.clone();
                down[n] -= h;
                let ku = additive_kernel(&x, &y, &spec_with(ls.clone(), up)).unwrap();
                let kd = additive_kernel(&x, &y, &spec_with(ls.clone(), down)).unwrap();
                let fd = (ku - kd) / (2.0 * h);
                assert_relative_eq!(grad[n], fd, max_relative = 1e-6, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn length_scale_gradient_zero_at_zero_lag() {
        let spec = spec(5, 3);
        let x = [0.1, 0.2, 0.3, 0.4, 0.5];
        let grad = kernel_grad_length_scales(&x, &x, &spec).unwrap();
        assert_eq!(grad, vec![0.0; 5]);
    }

    #[test]
    fn length_scale_gradient_single_dimension_closed_form() {
        let sigma2 = 0.7;
        let l = 1.3;
        let spec = spec_with(vec![l], vec![sigma2]);
        let (x, y) = (0.4, -0.9);
        let grad = kernel_grad_length_scales(&[x], &[y], &spec).unwrap();
        let z = base_kernel(x, y, l).unwrap();
        let delta = x - y;
        assert_relative_eq!(
            grad[0],
            sigma2 * z * delta * delta / (l * l),
            max_relative = 1e-14
        );
    }

    #[test]
    fn length_scale_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = rng.random_range(1..=6);
            let r = rng.random_range(1..=d);
            let ls: Vec<f64> = (0..d).map(|_| rng.random_range(0.4..2.0)).collect();
            let ov: Vec<f64> = (0..r).map(|_| rng.random_range(0.2..1.5)).collect();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let spec = spec_with(ls.clone(), ov.clone());
            let grad = kernel_grad_length_scales(&x, &y, &spec).unwrap();
            let h = 1e-6;
            for dd in 0..d {
                let mut up = ls.clone();
                up[dd] *= (h as f64).exp();
                let mut down = ls.clone();
                down[dd] *= (-h).exp();
                let ku = additive_kernel(&x, &y, &spec_with(up, ov.clone())).unwrap();
                let kd = additive_kernel(&x, &y, &spec_with(down, ov.clone())).unwrap();
                let fd = (ku - kd) / (2.0 * h);
                assert_relative_eq!(grad[dd], fd, max_relative = 1e-6, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let spec = spec(3, 2);
        assert!(additive_kernel(&[1.0, 2.0], &[1.0, 2.0, 3.0], &spec).is_err());
        assert!(kernel_grad_order_variances(&[1.0], &[1.0], &spec).is_err());
        assert!(kernel_grad_length_scales(&[1.0], &[1.0], &spec).is_err());
    }

    #[test]
    fn zero_lag_gradient_orders_are_binomials() {
        for d in 1..=8usize {
            let spec = spec(d, d);
            let x = vec![0.0; d];
            let grad = kernel_grad_order_variances(&x, &x, &spec).unwrap();
            for (n, g) in grad.iter().enumerate() {
                assert_eq!(*g, binomial(d, n + 1));
            }
        }
    }
}

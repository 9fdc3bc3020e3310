//! Elementary symmetric polynomials over the base kernel values.
//!
//! The order-n additive kernel term is exactly the nth elementary
//! symmetric polynomial e_n of the vector z with z_i = k_i(x_i, x'_i).
//! Two evaluators are provided: the Newton-Girard recursion over power
//! sums, and a subtraction-free dynamic-programming recurrence used as
//! the default. Both run all orders up to r in `O(D·r)`.

use crate::error::{Error, Result};

/// Elementary symmetric polynomial values e_0..e_r, with e_0 ≡ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EspVector(Vec<f64>);

impl EspVector {
    pub(crate) fn from_values(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty() && values[0] == 1.0);
        EspVector(values)
    }

    /// e_n. Panics if `n` exceeds the computed order.
    pub fn order(&self, n: usize) -> f64 {
        self.0[n]
    }

    /// Highest computed order r.
    pub fn max_order(&self) -> usize {
        self.0.len() - 1
    }

    /// All values e_0..e_r in order.
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Power sums s_1..s_r with s_k = Σ_i z_i^k.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSums(Vec<f64>);

impl PowerSums {
    /// s_k for k ≥ 1. Panics if `k` is zero or exceeds the computed order.
    pub fn sum(&self, k: usize) -> f64 {
        self.0[k - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Computes s_1..s_r. Powers of a fixed z are well defined for any
/// r ≥ 1, so r is not limited by the number of variables.
pub fn power_sums(z: &[f64], r: usize) -> Result<PowerSums> {
    if r == 0 {
        return Err(Error::invalid("power sum order must be at least 1"));
    }
    let mut powers: Vec<f64> = z.to_vec();
    let mut sums = Vec::with_capacity(r);
    sums.push(powers.iter().sum());
    for _ in 2..=r {
        for (p, &base) in powers.iter_mut().zip(z) {
            *p *= base;
        }
        sums.push(powers.iter().sum());
    }
    Ok(PowerSums(sums))
}

fn check_esp_order(z: &[f64], r: usize) -> Result<()> {
    if r == 0 || r > z.len() {
        return Err(Error::invalid(format!(
            "esp order must satisfy 1 <= r <= {}, got {r}",
            z.len()
        )));
    }
    Ok(())
}

/// Newton-Girard recursion: e_n = (1/n) Σ_{k=1}^n (−1)^{k−1} e_{n−k} s_k.
///
/// The alternating signs can cancel catastrophically when many z_i sit
/// near one; prefer [`esp_dp`] unless reproducing that exact recursion.
pub fn esp_newton_girard(z: &[f64], r: usize) -> Result<EspVector> {
    check_esp_order(z, r)?;
    let sums = power_sums(z, r)?;
    let mut e = Vec::with_capacity(r + 1);
    e.push(1.0);
    for n in 1..=r {
        let mut acc = 0.0;
        for k in 1..=n {
            let term = e[n - k] * sums.sum(k);
            if k % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / n as f64);
    }
    Ok(EspVector::from_values(e))
}

/// Subtraction-free evaluator: folds variables in one at a time via
/// e_n(z_1..z_m) = e_n(z_1..z_{m−1}) + z_m·e_{n−1}(z_1..z_{m−1}).
/// Every partial result is nonnegative when z ≥ 0.
pub fn esp_dp(z: &[f64], r: usize) -> Result<EspVector> {
    check_esp_order(z, r)?;
    Ok(EspVector::from_values(esp_dp_unchecked(z, r)))
}

pub(crate) fn esp_dp_unchecked(z: &[f64], r: usize) -> Vec<f64> {
    let mut e = vec![0.0; r + 1];
    e[0] = 1.0;
    for (m, &zm) in z.iter().enumerate() {
        let top = r.min(m + 1);
        for n in (1..=top).rev() {
            e[n] += zm * e[n - 1];
        }
    }
    e
}

/// Elementary symmetric polynomials of z with variable j removed,
/// orders 0..r over the remaining D−1 variables.
///
/// These are the kernel derivatives: ∂e_n/∂z_j = e_{n−1} over z without
/// z_j. The divide-out recurrence e_k^{(−j)} = e_k − z_j·e_{k−1}^{(−j)}
/// costs O(r) given `esp`, but its subtraction loses relative accuracy
/// when z_j dominates a term; whenever a step lands below 1e−12·|e_k|
/// the whole exclusion is recomputed subtraction-free over the reduced
/// variable set.
pub fn esp_excluding(z: &[f64], esp: &EspVector, j: usize, r: usize) -> Result<EspVector> {
    if j >= z.len() {
        return Err(Error::invalid(format!(
            "excluded index {j} out of range for {} variables",
            z.len()
        )));
    }
    if r + 1 > z.len() {
        return Err(Error::invalid(format!(
            "exclusion order must satisfy r <= {}, got {r}",
            z.len() - 1
        )));
    }
    if esp.max_order() < r {
        return Err(Error::invalid(format!(
            "esp carries orders up to {}, need {r}",
            esp.max_order()
        )));
    }
    let zj = z[j];
    let mut out = Vec::with_capacity(r + 1);
    out.push(1.0);
    for k in 1..=r {
        let ek = esp.order(k);
        let excl = ek - zj * out[k - 1];
        if excl.abs() < 1e-12 * ek.abs() {
            return Ok(EspVector::from_values(esp_dp_excluding(z, j, r)));
        }
        out.push(excl);
    }
    Ok(EspVector::from_values(out))
}

/// Fallback path: fresh subtraction-free evaluation over z minus z_j.
fn esp_dp_excluding(z: &[f64], j: usize, r: usize) -> Vec<f64> {
    let mut e = vec![0.0; r + 1];
    e[0] = 1.0;
    let mut seen = 0usize;
    for (i, &zi) in z.iter().enumerate() {
        if i == j {
            continue;
        }
        seen += 1;
        let top = r.min(seen);
        for n in (1..=top).rev() {
            e[n] += zi * e[n - 1];
        }
    }
    e
}

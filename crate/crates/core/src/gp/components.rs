//! Per-term component posteriors and the order-variance report.
//!
//! Because the kernel is a sum over terms, the latent posterior mean
//! decomposes exactly: each term σ_n²·Π_{d∈J} k_d contributes
//! K_term(X*, X_train)·α, and summing over every term of every order
//! reproduces the full posterior mean (minus the constant mean). Low
//! orders of these components are the model's interpretable parts.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gp::model::TrainedModel;
use crate::kernel::base_kernel;

/// Posterior mean of the single kernel term over dimension subset `dims`
/// (|dims| = `order`), evaluated at the query rows.
///
/// Returned values are zero-mean contributions in original target units:
/// they sum (over all terms of all orders) to the latent posterior mean
/// minus the constant mean.
pub fn component_posterior(
    model: &TrainedModel,
    order: usize,
    dims: &[usize],
    x_star: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    if dims.len() != order {
        return Err(Error::invalid(format!(
            "subset has {} dimensions, expected order {order}",
            dims.len()
        )));
    }
    let d = model.dims();
    for (i, &dim) in dims.iter().enumerate() {
        if dim >= d {
            return Err(Error::invalid(format!(
                "dimension index {dim} out of range for {d} inputs"
            )));
        }
        if dims[..i].contains(&dim) {
            return Err(Error::invalid(format!(
                "dimension index {dim} repeated in subset"
            )));
        }
    }
    let coefficient = model.kernel().term_coefficient(order)?;
    let length_scales = model.kernel().length_scales().values().to_vec();

    let queries = model.standardize_query(x_star)?;
    let train_rows = model.train_rows();
    let alpha = model.dual_weights();
    let t_std = model.standardization().target_std;

    let mut out = Vec::with_capacity(queries.len());
    for q in &queries {
        let mut acc = 0.0;
        for (i, row) in train_rows.iter().enumerate() {
            let mut term = coefficient;
            for &dim in dims {
                term *= base_kernel(q[dim], row[dim], length_scales[dim])?;
            }
            acc += term * alpha[i];
        }
        out.push(acc * t_std);
    }
    Ok(out)
}

/// Normalized per-order variance contributions of a fitted model.
///
/// Order n carries C(D, n) terms, each worth its coefficient at zero
/// lag, so the share of order n is its coefficient times C(D, n),
/// normalized over all orders to sum to 100.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    shares: Vec<f64>,
}

impl OrderReport {
    /// Share (percent) of order `n ≥ 1`.
    pub fn share(&self, n: usize) -> f64 {
        self.shares[n - 1]
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn max_order(&self) -> usize {
        self.shares.len()
    }

    /// The order holding the largest share (ties broken low).
    pub fn dominant_order(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.shares.iter().enumerate() {
            if s > self.shares[best] {
                best = i;
            }
        }
        best + 1
    }
}

pub fn order_report(model: &TrainedModel) -> OrderReport {
    OrderReport {
        shares: model.order_shares(),
    }
}

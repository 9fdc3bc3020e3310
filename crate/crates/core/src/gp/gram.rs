//! Gram matrix assembly and its hyperparameter derivatives.
//!
//! Cost is `O(N·M·D·R)` for the additive family: one symmetric-polynomial
//! recursion per entry.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gp::kernel_model::GpKernel;

fn check_cols(cols: usize, kernel: &GpKernel) -> Result<()> {
    if cols != kernel.dims() {
        return Err(Error::invalid(format!(
            "input has {cols} columns, kernel expects {}",
            kernel.dims()
        )));
    }
    Ok(())
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Cross-covariance matrix: entry (i, j) is k(a_i, b_j).
pub fn gram(a: &DMatrix<f64>, b: &DMatrix<f64>, kernel: &GpKernel) -> Result<DMatrix<f64>> {
    check_cols(a.ncols(), kernel)?;
    check_cols(b.ncols(), kernel)?;
    let rows_a = matrix_rows(a);
    let rows_b = matrix_rows(b);
    let mut out = DMatrix::zeros(rows_a.len(), rows_b.len());
    for (i, ra) in rows_a.iter().enumerate() {
        for (j, rb) in rows_b.iter().enumerate() {
            out[(i, j)] = kernel.eval(ra, rb)?;
        }
    }
    Ok(out)
}

/// Symmetric Gram matrix over one set of rows; computes the lower
/// triangle once and mirrors it.
pub fn gram_sym(a: &DMatrix<f64>, kernel: &GpKernel) -> Result<DMatrix<f64>> {
    check_cols(a.ncols(), kernel)?;
    let rows = matrix_rows(a);
    let n = rows.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let value = kernel.eval(&rows[i], &rows[j])?;
            out[(i, j)] = value;
            out[(j, i)] = value;
        }
    }
    Ok(out)
}

/// Symmetric Gram matrix plus one derivative matrix per hyperparameter,
/// ordered as the kernel packs them, with ∂K/∂(log σ_noise²) =
/// σ_noise²·I appended last. `k` itself excludes the noise diagonal.
pub fn gram_with_grads(
    a: &DMatrix<f64>,
    kernel: &GpKernel,
    noise_variance: f64,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    check_cols(a.ncols(), kernel)?;
    if !noise_variance.is_finite() || noise_variance <= 0.0 {
        return Err(Error::invalid(format!(
            "noise variance must be positive and finite, got {noise_variance}"
        )));
    }
    let rows = matrix_rows(a);
    let n = rows.len();
    let p = kernel.n_params();
    let mut k = DMatrix::zeros(n, n);
    let mut grads = vec![DMatrix::zeros(n, n); p + 1];
    let mut buffer = vec![0.0; p];
    for i in 0..n {
        for j in 0..=i {
            let value = kernel.eval_with_grads(&rows[i], &rows[j], &mut buffer)?;
            k[(i, j)] = value;
            k[(j, i)] = value;
            for (param, &g) in buffer.iter().enumerate() {
                grads[param][(i, j)] = g;
                grads[param][(j, i)] = g;
            }
        }
        grads[p][(i, i)] = noise_variance;
    }
    Ok((k, grads))
}

//! Fitted posterior state and prediction.

use nalgebra::{DMatrix, DVector};

use crate::data::StandardizationStats;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gp::kernel_model::GpKernel;
use crate::gp::likelihood::{likelihood_parts, LikelihoodParts};

/// Observation noise variance plus the constant mean, both in
/// standardized target units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    noise_variance: f64,
    constant_mean: f64,
}

impl NoiseModel {
    pub fn new(noise_variance: f64, constant_mean: f64) -> Result<Self> {
        if !noise_variance.is_finite() || noise_variance <= 0.0 {
            return Err(Error::invalid(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        if !constant_mean.is_finite() {
            return Err(Error::invalid("constant mean must be finite"));
        }
        Ok(NoiseModel {
            noise_variance,
            constant_mean,
        })
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn constant_mean(&self) -> f64 {
        self.constant_mean
    }
}

/// How the winning optimization run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    pub final_nll: f64,
    pub iterations: usize,
    pub restart_index: usize,
    pub converged: bool,
}

impl FitDiagnostics {
    fn direct(final_nll: f64) -> Self {
        FitDiagnostics {
            final_nll,
            iterations: 0,
            restart_index: 0,
            converged: true,
        }
    }
}

/// A fitted GP: hyperparameters, the Cholesky factor of the noisy Gram
/// matrix, and the dual weights through which every posterior mean is a
/// linear function of the kernel.
///
/// Training inputs and all internal state are in standardized units; the
/// stored [`StandardizationStats`] map predictions back to (and query
/// points from) original units.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    kernel: GpKernel,
    noise: NoiseModel,
    train_inputs: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
    jitter: f64,
    dual_weights: DVector<f64>,
    standardization: StandardizationStats,
    diagnostics: FitDiagnostics,
}

/// Posterior means and variances in original target units.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveDistribution {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub includes_noise: bool,
}

/// Factorizes K + σ_noise²·I over standardized data and solves for the
/// dual weights α = (K + σ_noise²·I)⁻¹(y − μ).
pub fn fit_posterior(
    data: &Dataset,
    kernel: GpKernel,
    noise: NoiseModel,
    standardization: StandardizationStats,
) -> Result<TrainedModel> {
    if data.dims() != kernel.dims() {
        return Err(Error::invalid(format!(
            "data has {} columns, kernel expects {}",
            data.dims(),
            kernel.dims()
        )));
    }
    if standardization.dims() != data.dims() {
        return Err(Error::invalid(
            "standardization stats do not match data dimension",
        ));
    }
    let LikelihoodParts {
        value,
        factor,
        alpha,
    } = likelihood_parts(
        &kernel,
        noise.noise_variance(),
        noise.constant_mean(),
        data.inputs(),
        data.targets(),
    )?;
    Ok(TrainedModel {
        kernel,
        noise,
        train_inputs: data.inputs().clone(),
        chol_lower: factor.chol.l(),
        jitter: factor.jitter,
        dual_weights: alpha,
        standardization,
        diagnostics: FitDiagnostics::direct(value),
    })
}

impl TrainedModel {
    pub(crate) fn from_parts(
        kernel: GpKernel,
        noise: NoiseModel,
        train_inputs: DMatrix<f64>,
        chol_lower: DMatrix<f64>,
        jitter: f64,
        dual_weights: DVector<f64>,
        standardization: StandardizationStats,
        diagnostics: FitDiagnostics,
    ) -> Self {
        TrainedModel {
            kernel,
            noise,
            train_inputs,
            chol_lower,
            jitter,
            dual_weights,
            standardization,
            diagnostics,
        }
    }

    pub fn kernel(&self) -> &GpKernel {
        &self.kernel
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn train_inputs(&self) -> &DMatrix<f64> {
        &self.train_inputs
    }

    pub fn n_train(&self) -> usize {
        self.train_inputs.nrows()
    }

    pub fn dims(&self) -> usize {
        self.train_inputs.ncols()
    }

    pub fn chol_factor(&self) -> &DMatrix<f64> {
        &self.chol_lower
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dual_weights(&self) -> &DVector<f64> {
        &self.dual_weights
    }

    pub fn standardization(&self) -> &StandardizationStats {
        &self.standardization
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    pub(crate) fn set_diagnostics(&mut self, diagnostics: FitDiagnostics) {
        self.diagnostics = diagnostics;
    }

    /// The constant mean in original target units.
    pub fn constant_mean_original(&self) -> f64 {
        self.standardization
            .destandardize_target(self.noise.constant_mean())
    }

    /// Per-order percentage shares of prior variance (the fitted
    /// interaction-order report).
    pub fn order_shares(&self) -> Vec<f64> {
        self.kernel.order_shares()
    }

    /// Kernel log hyperparameters followed by log noise variance: the
    /// coordinates the optimizer works in.
    pub fn packed_params(&self) -> Vec<f64> {
        let mut packed = self.kernel.pack();
        packed.push(self.noise.noise_variance().ln());
        packed
    }

    /// Training rows in standardized units.
    pub(crate) fn train_rows(&self) -> Vec<Vec<f64>> {
        (0..self.train_inputs.nrows())
            .map(|i| self.train_inputs.row(i).iter().copied().collect())
            .collect()
    }

    pub(crate) fn standardize_query(&self, x_star: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
        if x_star.ncols() != self.dims() {
            return Err(Error::invalid(format!(
                "query has {} columns, model expects {}",
                x_star.ncols(),
                self.dims()
            )));
        }
        (0..x_star.nrows())
            .map(|i| {
                let row: Vec<f64> = x_star.row(i).iter().copied().collect();
                self.standardization.standardize_input_row(&row)
            })
            .collect()
    }
}

/// Posterior predictive distribution at the query rows (original units).
///
/// The latent variance is k(x*, x*) − ‖L⁻¹k*‖²; with `include_noise` the
/// observation noise is added before destandardization.
pub fn predict(
    model: &TrainedModel,
    x_star: &DMatrix<f64>,
    include_noise: bool,
) -> Result<PredictiveDistribution> {
    let queries = model.standardize_query(x_star)?;
    let train_rows = model.train_rows();
    let n = train_rows.len();
    let t_std = model.standardization().target_std;
    let mu = model.noise().constant_mean();

    let mut means = Vec::with_capacity(queries.len());
    let mut variances = Vec::with_capacity(queries.len());
    let mut k_star = DVector::zeros(n);
    for q in &queries {
        for (i, row) in train_rows.iter().enumerate() {
            k_star[i] = model.kernel().eval(q, row)?;
        }
        let mean_std = mu + k_star.dot(model.dual_weights());
        let v = model
            .chol_lower
            .solve_lower_triangular(&k_star)
            .ok_or_else(|| Error::invalid("triangular solve failed"))?;
        let mut variance_std = model.kernel().eval(q, q)? - v.dot(&v);
        // Rounding can push an exactly-interpolated point a hair negative.
        variance_std = variance_std.max(f64::MIN_POSITIVE);
        if include_noise {
            variance_std += model.noise().noise_variance();
        }
        means.push(model.standardization().destandardize_target(mean_std));
        variances.push(variance_std * t_std * t_std);
    }
    Ok(PredictiveDistribution {
        means,
        variances,
        includes_noise: include_noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::AdditiveKernelSpec;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_model(noise_variance: f64) -> TrainedModel {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inputs = DMatrix::from_fn(10, 2, |_, _| rng.random_range(-1.5..1.5));
        let targets = DVector::from_fn(10, |i, _| (inputs[(i, 0)]).sin() + 0.3 * inputs[(i, 1)]);
        let data = Dataset::new(inputs, targets, None).unwrap();
        let kernel: GpKernel = AdditiveKernelSpec::default_init(2, 2).unwrap().into();
        let noise = NoiseModel::new(noise_variance, 0.0).unwrap();
        fit_posterior(&data, kernel, noise, StandardizationStats::identity(2)).unwrap()
    }

    #[test]
    fn single_point_posterior_closed_form() {
        let kernel: GpKernel = AdditiveKernelSpec::default_init(1, 1).unwrap().into();
        let inputs = DMatrix::from_row_slice(1, 1, &[0.4]);
        let targets = DVector::from_vec(vec![2.0]);
        let data = Dataset::new(inputs, targets, None).unwrap();
        let noise = NoiseModel::new(0.5, 0.25).unwrap();
        let model = fit_posterior(
            &data,
            kernel.clone(),
            noise,
            StandardizationStats::identity(1),
        )
        .unwrap();

        let k_xx = kernel.prior_variance();
        let k_y = k_xx + 0.5 + model.jitter();
        assert_relative_eq!(model.chol_factor()[(0, 0)], k_y.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(
            model.dual_weights()[0],
            (2.0 - 0.25) / k_y,
            max_relative = 1e-12
        );

        // Mean at a new point: μ + k*·(k(x,x)+σ²)⁻¹(y−μ).
        let x_new = DMatrix::from_row_slice(1, 1, &[0.9]);
        let k_star = kernel.eval(&[0.9], &[0.4]).unwrap();
        let pred = predict(&model, &x_new, false).unwrap();
        assert_relative_eq!(
            pred.means[0],
            0.25 + k_star * (2.0 - 0.25) / k_y,
            max_relative = 1e-12
        );
    }

    #[test]
    fn reconstruction_and_dual_weight_identities() {
        let model = toy_model(0.1);
        let n = model.n_train();
        let l = model.chol_factor();
        let reconstructed = l * l.transpose();
        let k = crate::gp::gram::gram_sym(model.train_inputs(), model.kernel()).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut expected = k[(i, j)];
                if i == j {
                    expected += 0.1 + model.jitter();
                }
                assert_relative_eq!(reconstructed[(i, j)], expected, max_relative = 1e-8);
            }
        }
        // (K_y + jitter)·α = y − μ up to solve accuracy. Reconstruct the
        // residual through the factor.
        let residual = l * (l.transpose() * model.dual_weights());
        let k_alpha = &reconstructed * model.dual_weights();
        for i in 0..n {
            assert_relative_eq!(residual[i], k_alpha[i], max_relative = 1e-10);
        }
    }

    #[test]
    fn near_noiseless_model_interpolates_training_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inputs = DMatrix::from_fn(8, 2, |_, _| rng.random_range(-1.5..1.5));
        let targets = DVector::from_fn(8, |i, _| (inputs[(i, 0)] * 1.3).cos());
        let data = Dataset::new(inputs.clone(), targets.clone(), None).unwrap();
        let kernel: GpKernel = AdditiveKernelSpec::default_init(2, 2).unwrap().into();
        let noise = NoiseModel::new(1e-12, 0.0).unwrap();
        let model =
            fit_posterior(&data, kernel, noise, StandardizationStats::identity(2)).unwrap();
        let pred = predict(&model, &inputs, false).unwrap();
        for (p, y) in pred.means.iter().zip(targets.iter()) {
            assert!((p - y).abs() < 1e-4, "prediction {p} vs target {y}");
        }
    }

    #[test]
    fn far_points_revert_to_prior() {
        let model = toy_model(0.1);
        let far = DMatrix::from_row_slice(1, 2, &[500.0, -500.0]);
        let pred = predict(&model, &far, false).unwrap();
        assert!((pred.means[0] - 0.0).abs() < 1e-6);
        assert_relative_eq!(
            pred.variances[0],
            model.kernel().prior_variance(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn predictive_variance_includes_noise_floor() {
        let model = toy_model(0.2);
        let x = DMatrix::from_fn(5, 2, |i, j| (i as f64) * 0.3 - (j as f64));
        let with_noise = predict(&model, &x, true).unwrap();
        let latent = predict(&model, &x, false).unwrap();
        for (v_noise, v_latent) in with_noise.variances.iter().zip(&latent.variances) {
            assert!(*v_noise >= 0.2 * (1.0 - 1e-8));
            assert!(v_noise > v_latent);
            assert!(*v_latent > 0.0);
        }
    }

    #[test]
    fn queries_are_destandardized_consistently(){
        // A model fit in standardized units must accept original-unit
        // queries and answer in original units.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let raw_inputs = DMatrix::from_fn(12, 1, |_, _| rng.random_range(100.0..110.0));
        let raw_targets = DVector::from_fn(12, |i, _| 5.0 * raw_inputs[(i, 0)] + 3.0);
        let raw = Dataset::new(raw_inputs.clone(), raw_targets.clone(), None).unwrap();
        let (std_data, stats) = crate::data::standardize(&raw).unwrap();
        let kernel: GpKernel = AdditiveKernelSpec::default_init(1, 1).unwrap().into();
        let noise = NoiseModel::new(1e-10, 0.0).unwrap();
        let model = fit_posterior(&std_data, kernel, noise, stats).unwrap();
        let pred = predict(&model, &raw_inputs, false).unwrap();
        for (p, y) in pred.means.iter().zip(raw_targets.iter()) {
            assert!((p - y).abs() < 1e-3 * y.abs());
        }
    }

    #[test]
    fn rejects_mismatched_query_dimension() {
        let model = toy_model(0.1);
        let bad = DMatrix::zeros(2, 3);
        assert!(predict(&model, &bad, false).is_err());
    }
}

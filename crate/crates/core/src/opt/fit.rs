//! Full fitting pipeline: standardize, optimize the marginal likelihood
//! from several starting points, keep the best run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{standardize, Dataset};
use crate::error::{Error, Result};
use crate::gp::{
    fit_posterior, neg_log_marginal_likelihood, FitDiagnostics, GpKernel, NoiseModel,
    TrainedModel,
};
use crate::kernel::AdditiveKernelSpec;
use crate::opt::lbfgs::{lbfgs_minimize, LbfgsOutcome};
use crate::opt::FitConfig;

/// Starting noise variance in standardized target units.
pub const DEFAULT_NOISE_VARIANCE: f64 = 0.1;

/// Fits an additive-kernel GP: unit starting length-scales, signal
/// variance split equally over orders up to [`FitConfig::effective_order`],
/// noise starting at [`DEFAULT_NOISE_VARIANCE`].
pub fn fit(data: &Dataset, cfg: &FitConfig) -> Result<TrainedModel> {
    let order = cfg.effective_order(data.dims());
    let template: GpKernel = AdditiveKernelSpec::default_init(data.dims(), order)?.into();
    fit_with_template(data, cfg, &template)
}

/// Fits any kernel family, starting run 0 from the template's own
/// hyperparameters and each restart from a standard-normal perturbation
/// of that point in log space.
pub fn fit_with_template(
    data: &Dataset,
    cfg: &FitConfig,
    template: &GpKernel,
) -> Result<TrainedModel> {
    let mut x0 = template.pack();
    x0.push(DEFAULT_NOISE_VARIANCE.ln());
    fit_runs(data, cfg, template, &x0, cfg.restarts)
}

/// Single optimization run from an explicit packed starting point
/// (kernel log hyperparameters followed by log noise variance). Used to
/// warm-start one model family from another's optimum.
pub fn fit_from_init(
    data: &Dataset,
    cfg: &FitConfig,
    template: &GpKernel,
    init: &[f64],
) -> Result<TrainedModel> {
    fit_runs(data, cfg, template, init, 0)
}

fn fit_runs(
    data: &Dataset,
    cfg: &FitConfig,
    template: &GpKernel,
    x0: &[f64],
    restarts: usize,
) -> Result<TrainedModel> {
    cfg.validate()?;
    if data.dims() != template.dims() {
        return Err(Error::invalid(format!(
            "data has {} columns, kernel expects {}",
            data.dims(),
            template.dims()
        )));
    }
    if x0.len() != template.n_params() + 1 {
        return Err(Error::invalid(format!(
            "expected {} starting coordinates, got {}",
            template.n_params() + 1,
            x0.len()
        )));
    }
    let (std_data, stats) = standardize(data)?;
    let mu = std_data.targets().sum() / std_data.len() as f64;

    let mut best: Option<(LbfgsOutcome, usize)> = None;
    let mut failures = Vec::new();
    for restart in 0..=restarts {
        let start = if restart == 0 {
            x0.to_vec()
        } else {
            perturbed_start(x0, cfg.seed, restart)
        };
        let objective =
            |p: &[f64]| neg_log_marginal_likelihood(p, template, &std_data);
        match lbfgs_minimize(objective, &start, cfg) {
            Ok(outcome) => {
                let better = match &best {
                    Some((incumbent, _)) => outcome.value < incumbent.value,
                    None => true,
                };
                if better {
                    best = Some((outcome, restart));
                }
            }
            Err(e) => failures.push(format!("restart {restart}: {e}")),
        }
    }

    let (outcome, restart_index) = best.ok_or(Error::AllRestartsFailed { reasons: failures })?;
    let n_kernel = template.n_params();
    let kernel = template.with_packed(&outcome.x[..n_kernel])?;
    let noise = NoiseModel::new(outcome.x[n_kernel].exp(), mu)?;
    let mut model = fit_posterior(&std_data, kernel, noise, stats)?;
    model.set_diagnostics(FitDiagnostics {
        final_nll: model.diagnostics().final_nll,
        iterations: outcome.iterations,
        restart_index,
        converged: outcome.converged,
    });
    Ok(model)
}

/// Restart k's starting point: the default plus one standard-normal
/// draw per coordinate, seeded independently per restart so parallel
/// and serial execution would draw identical points.
fn perturbed_start(x0: &[f64], seed: u64, restart: usize) -> Vec<f64> {
    let stream = seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    x0.iter()
        .map(|&v| v + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn additive_toy_data(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-2.0..2.0));
        let targets = DVector::from_fn(n, |i, _| {
            (1.5 * inputs[(i, 0)]).sin() + 0.7 * inputs[(i, 1)]
                + 0.05 * rng.sample::<f64, _>(StandardNormal)
        });
        Dataset::new(inputs, targets, None).unwrap()
    }

    fn quick_cfg() -> FitConfig {
        FitConfig {
            max_iterations: 60,
            restarts: 2,
            seed: 3,
            ..FitConfig::default()
        }
    }

    #[test]
    fn fit_improves_on_the_default_initialization() {
        let data = additive_toy_data(25, 1);
        let cfg = quick_cfg();
        let model = fit(&data, &cfg).unwrap();

        let (std_data, _) = standardize(&data).unwrap();
        let template: GpKernel = AdditiveKernelSpec::default_init(2, 2).unwrap().into();
        let mut x0 = template.pack();
        x0.push(DEFAULT_NOISE_VARIANCE.ln());
        let (initial_nll, _) =
            neg_log_marginal_likelihood(&x0, &template, &std_data).unwrap();
        assert!(model.diagnostics().final_nll <= initial_nll);
    }

    #[test]
    fn zero_restarts_runs_once_deterministically() {
        let data = additive_toy_data(15, 2);
        let cfg = FitConfig {
            restarts: 0,
            max_iterations: 40,
            ..FitConfig::default()
        };
        let a = fit(&data, &cfg).unwrap();
        let b = fit(&data, &cfg).unwrap();
        assert_eq!(a.diagnostics().restart_index, 0);
        assert_eq!(a.packed_params(), b.packed_params());
        assert_eq!(a.diagnostics().final_nll, b.diagnostics().final_nll);
    }

    #[test]
    fn best_restart_wins() {
        let data = additive_toy_data(20, 4);
        let cfg = quick_cfg();
        let template: GpKernel = AdditiveKernelSpec::default_init(2, 2).unwrap().into();
        let best = fit_with_template(&data, &cfg, &template).unwrap();

        // Each restart taken alone can do no better than the reported
        // winner.
        let (std_data, _) = standardize(&data).unwrap();
        let mut x0 = template.pack();
        x0.push(DEFAULT_NOISE_VARIANCE.ln());
        for restart in 0..=cfg.restarts {
            let start = if restart == 0 {
                x0.clone()
            } else {
                perturbed_start(&x0, cfg.seed, restart)
            };
            let outcome = lbfgs_minimize(
                |p| neg_log_marginal_likelihood(p, &template, &std_data),
                &start,
                &cfg,
            )
            .unwrap();
            assert!(best.diagnostics().final_nll <= outcome.value + 1e-9);
        }
    }

    #[test]
    fn fit_from_init_matches_manual_optimization() {
        let data = additive_toy_data(15, 5);
        let cfg = FitConfig {
            max_iterations: 30,
            ..FitConfig::default()
        };
        let template: GpKernel = AdditiveKernelSpec::default_init(2, 2).unwrap().into();
        let mut init = template.pack();
        init.push((0.05f64).ln());
        let model = fit_from_init(&data, &cfg, &template, &init).unwrap();
        assert_eq!(model.diagnostics().restart_index, 0);

        let (std_data, _) = standardize(&data).unwrap();
        let outcome = lbfgs_minimize(
            |p| neg_log_marginal_likelihood(p, &template, &std_data),
            &init,
            &cfg,
        )
        .unwrap();
        assert!((model.diagnostics().final_nll - outcome.value).abs() < 1e-10);
    }

    #[test]
    fn identical_seeds_give_bit_identical_models() {
        let data = additive_toy_data(18, 6);
        let cfg = quick_cfg();
        let a = fit(&data, &cfg).unwrap();
        let b = fit(&data, &cfg).unwrap();
        assert_eq!(a.packed_params(), b.packed_params());
        assert_eq!(a.dual_weights(), b.dual_weights());
        let different_seed = FitConfig {
            seed: cfg.seed + 1,
            ..cfg
        };
        // A different seed may or may not change the winner; the run
        // itself must still succeed.
        fit(&data, &different_seed).unwrap();
    }
}

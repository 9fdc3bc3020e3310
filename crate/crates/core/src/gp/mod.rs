//! Gaussian process regression over the kernel families: Gram assembly,
//! marginal likelihood, posterior fitting, prediction, interpretability
//! reports, prior sampling, and model persistence.

mod components;
mod gram;
mod kernel_model;
mod likelihood;
mod model;
mod persist;
mod sample;

pub use components::{component_posterior, order_report, OrderReport};
pub use gram::{gram, gram_sym, gram_with_grads};
pub use kernel_model::GpKernel;
pub use likelihood::neg_log_marginal_likelihood;
pub use model::{
    fit_posterior, predict, FitDiagnostics, NoiseModel, PredictiveDistribution, TrainedModel,
};
pub use sample::sample_prior;

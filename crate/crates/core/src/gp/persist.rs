//! Model persistence: a versioned, self-describing key-value text file.
//!
//! The file stores hyperparameters, standardization stats, training
//! inputs, and dual weights. The Cholesky factor is not stored: it is
//! recomputed on load with the recorded jitter and verified against the
//! stored likelihood value, so a corrupted or hand-edited file fails
//! loudly instead of predicting garbage.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::data::StandardizationStats;
use crate::error::{Error, Result};
use crate::gp::kernel_model::GpKernel;
use crate::gp::likelihood::{factorize_with_fixed_jitter, log_det_from_factor, LN_2PI};
use crate::gp::model::{FitDiagnostics, NoiseModel, TrainedModel};
use crate::kernel::{
    AdditiveKernelSpec, EspMethod, HullKernelSpec, LengthScales, OrderVariances,
};

const FORMAT_TAG: &str = "addgp-model-v1";

/// Relative tolerance for the stored-likelihood consistency check.
const NLL_CHECK_TOLERANCE: f64 = 1e-6;

fn join_floats(values: impl IntoIterator<Item = f64>) -> String {
    let mut out = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // `{}` on f64 is the shortest representation that parses back to
        // the same bits, so saving and loading is exact.
        let _ = write!(out, "{v}");
    }
    out
}

impl TrainedModel {
    /// Serializes the model to `path`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        out.push_str(FORMAT_TAG);
        out.push('\n');
        let kernel = self.kernel();
        let mut push = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        push("kernel", kernel.family_name().to_string());
        push("dims", self.dims().to_string());
        push(
            "length_scales",
            join_floats(kernel.length_scales().values().iter().copied()),
        );
        match kernel {
            GpKernel::Additive { spec, method } => {
                push("esp", method.name().to_string());
                push("max_order", spec.max_order().to_string());
                push(
                    "order_variances",
                    join_floats(spec.order_variances().values().iter().copied()),
                );
            }
            GpKernel::SquaredExp { amplitude, .. } => {
                push("amplitude", format!("{amplitude}"));
            }
            GpKernel::Hull(spec) => {
                push("amplitude", format!("{}", spec.amplitude()));
                push("alpha", format!("{}", spec.alpha()));
            }
        }
        push("noise_variance", format!("{}", self.noise().noise_variance()));
        push("constant_mean", format!("{}", self.noise().constant_mean()));
        let stats = self.standardization();
        push("input_means", join_floats(stats.input_means.iter().copied()));
        push("input_stds", join_floats(stats.input_stds.iter().copied()));
        push("target_mean", format!("{}", stats.target_mean));
        push("target_std", format!("{}", stats.target_std));
        push("jitter", format!("{}", self.jitter()));
        push("nll", format!("{}", self.diagnostics().final_nll));
        push("fit_iterations", self.diagnostics().iterations.to_string());
        push("fit_restart", self.diagnostics().restart_index.to_string());
        push("fit_converged", self.diagnostics().converged.to_string());
        push("n_train", self.n_train().to_string());
        for i in 0..self.n_train() {
            push(
                "row",
                join_floats(self.train_inputs().row(i).iter().copied()),
            );
        }
        push(
            "dual",
            join_floats(self.dual_weights().iter().copied()),
        );
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Loads a model from `path`, recomputing and verifying its factor.
    pub fn load(path: impl AsRef<Path>) -> Result<TrainedModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut lines = text.lines();
        if lines.next() != Some(FORMAT_TAG) {
            return Err(Error::ModelLoad(format!(
                "{}: not a {FORMAT_TAG} file",
                path.display()
            )));
        }

        let mut fields: Vec<(String, String)> = Vec::new();
        for (number, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line.split_once(" = ").ok_or_else(|| {
                Error::ModelLoad(format!("line {}: expected `key = value`", number + 2))
            })?;
            fields.push((key.to_string(), value.to_string()));
        }

        let get = |key: &str| -> Result<&str> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::ModelLoad(format!("missing field {key:?}")))
        };
        let parse_f64 = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| Error::ModelLoad(format!("field {key:?} is not a number")))
        };
        let parse_usize = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| Error::ModelLoad(format!("field {key:?} is not an integer")))
        };
        let parse_vec = |key: &str| -> Result<Vec<f64>> {
            get(key)?
                .split_whitespace()
                .map(|tok| {
                    tok.parse()
                        .map_err(|_| Error::ModelLoad(format!("field {key:?} is not numeric")))
                })
                .collect()
        };

        let dims = parse_usize("dims")?;
        let length_scales = LengthScales::new(parse_vec("length_scales")?)
            .map_err(|e| Error::ModelLoad(e.to_string()))?;
        if length_scales.len() != dims {
            return Err(Error::ModelLoad("length_scales do not match dims".into()));
        }
        let kernel = match get("kernel")? {
            "additive" => {
                let method = EspMethod::parse(get("esp")?)
                    .map_err(|e| Error::ModelLoad(e.to_string()))?;
                let variances = OrderVariances::new(parse_vec("order_variances")?)
                    .map_err(|e| Error::ModelLoad(e.to_string()))?;
                if variances.len() != parse_usize("max_order")? {
                    return Err(Error::ModelLoad(
                        "order_variances do not match max_order".into(),
                    ));
                }
                GpKernel::Additive {
                    spec: AdditiveKernelSpec::new(length_scales, variances)
                        .map_err(|e| Error::ModelLoad(e.to_string()))?,
                    method,
                }
            }
            "squared-exp" => GpKernel::squared_exp(length_scales, parse_f64("amplitude")?)
                .map_err(|e| Error::ModelLoad(e.to_string()))?,
            "hull" => GpKernel::Hull(
                HullKernelSpec::new(parse_f64("amplitude")?, parse_f64("alpha")?, length_scales)
                    .map_err(|e| Error::ModelLoad(e.to_string()))?,
            ),
            other => {
                return Err(Error::ModelLoad(format!("unknown kernel family {other:?}")))
            }
        };

        let noise = NoiseModel::new(parse_f64("noise_variance")?, parse_f64("constant_mean")?)
            .map_err(|e| Error::ModelLoad(e.to_string()))?;
        let stats = StandardizationStats {
            input_means: parse_vec("input_means")?,
            input_stds: parse_vec("input_stds")?,
            target_mean: parse_f64("target_mean")?,
            target_std: parse_f64("target_std")?,
        };
        if stats.input_means.len() != dims || stats.input_stds.len() != dims {
            return Err(Error::ModelLoad(
                "standardization stats do not match dims".into(),
            ));
        }

        let n_train = parse_usize("n_train")?;
        let rows: Vec<Vec<f64>> = fields
            .iter()
            .filter(|(k, _)| k == "row")
            .map(|(_, v)| {
                v.split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>()
                            .map_err(|_| Error::ModelLoad("row is not numeric".into()))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        if rows.len() != n_train || rows.iter().any(|r| r.len() != dims) {
            return Err(Error::ModelLoad(format!(
                "expected {n_train} rows of {dims} values"
            )));
        }
        let train_inputs = DMatrix::from_fn(n_train, dims, |i, j| rows[i][j]);
        let dual = parse_vec("dual")?;
        if dual.len() != n_train {
            return Err(Error::ModelLoad("dual weights do not match n_train".into()));
        }
        let dual_weights = DVector::from_vec(dual);

        let jitter = parse_f64("jitter")?;
        let stored_nll = parse_f64("nll")?;
        let diagnostics = FitDiagnostics {
            final_nll: stored_nll,
            iterations: parse_usize("fit_iterations")?,
            restart_index: parse_usize("fit_restart")?,
            converged: get("fit_converged")? == "true",
        };

        // Rebuild K_y, refactorize with the recorded jitter, and verify
        // the stored likelihood. The residual y − μ is recovered through
        // the stored dual weights: r = K_y·α, so the quadratic term is
        // αᵀK_y α.
        let mut k_y = crate::gp::gram::gram_sym(&train_inputs, &kernel)?;
        for i in 0..n_train {
            k_y[(i, i)] += noise.noise_variance();
        }
        let factor = factorize_with_fixed_jitter(&k_y, jitter)
            .map_err(|e| Error::ModelLoad(e.to_string()))?;
        for i in 0..n_train {
            k_y[(i, i)] += jitter;
        }
        let quadratic = (&k_y * &dual_weights).dot(&dual_weights);
        let recomputed = 0.5 * quadratic
            + 0.5 * log_det_from_factor(&factor.chol)
            + 0.5 * n_train as f64 * LN_2PI;
        if (recomputed - stored_nll).abs() > NLL_CHECK_TOLERANCE * stored_nll.abs().max(1.0) {
            return Err(Error::ModelLoad(format!(
                "likelihood checksum mismatch: stored {stored_nll}, recomputed {recomputed}"
            )));
        }

        Ok(TrainedModel::from_parts(
            kernel,
            noise,
            train_inputs,
            factor.chol.l(),
            jitter,
            dual_weights,
            stats,
            diagnostics,
        ))
    }
}

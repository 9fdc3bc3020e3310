//! Tabular data loading, standardization, splitting, and synthetic
//! generators.

mod csv_io;
mod synth;

pub use csv_io::{load_csv, write_csv, TargetColumn};
pub use synth::{axis_sines_truth, in_l_region, synth_axis_sines};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// An N×D input matrix with its N targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: DMatrix<f64>,
    targets: DVector<f64>,
    /// D feature labels followed by the target label, when known.
    column_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        inputs: DMatrix<f64>,
        targets: DVector<f64>,
        column_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if inputs.nrows() == 0 || inputs.ncols() == 0 {
            return Err(Error::invalid(
                "dataset must have at least one row and column",
            ));
        }
        if targets.len() != inputs.nrows() {
            return Err(Error::invalid(format!(
                "row count mismatch: {} inputs vs {} targets",
                inputs.nrows(),
                targets.len()
            )));
        }
        if let Some(names) = &column_names {
            if names.len() != inputs.ncols() + 1 {
                return Err(Error::invalid(format!(
                    "expected {} column names, got {}",
                    inputs.ncols() + 1,
                    names.len()
                )));
            }
        }
        if inputs.iter().any(|v| !v.is_finite()) || targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        Ok(Dataset {
            inputs,
            targets,
            column_names,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    /// Row `i` of the inputs as an owned vector.
    pub fn input_row(&self, i: usize) -> Vec<f64> {
        self.inputs.row(i).iter().copied().collect()
    }

    /// All input rows as owned vectors, for per-pair kernel loops.
    pub fn input_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.input_row(i)).collect()
    }

    fn subset(&self, indices: &[usize]) -> Dataset {
        let inputs = DMatrix::from_fn(indices.len(), self.dims(), |i, j| {
            self.inputs[(indices[i], j)]
        });
        let targets = DVector::from_fn(indices.len(), |i, _| self.targets[indices[i]]);
        Dataset {
            inputs,
            targets,
            column_names: self.column_names.clone(),
        }
    }
}

/// The affine transforms applied by [`standardize`], kept so predictions
/// can be mapped back to original units.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationStats {
    pub input_means: Vec<f64>,
    pub input_stds: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

impl StandardizationStats {
    /// No-op transform, for data that is already in model units.
    pub fn identity(dims: usize) -> Self {
        StandardizationStats {
            input_means: vec![0.0; dims],
            input_stds: vec![1.0; dims],
            target_mean: 0.0,
            target_std: 1.0,
        }
    }

    pub fn dims(&self) -> usize {
        self.input_means.len()
    }

    pub fn standardize_input_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.input_means.len() {
            return Err(Error::invalid(format!(
                "expected {} input columns, got {}",
                self.input_means.len(),
                row.len()
            )));
        }
        Ok(row
            .iter()
            .zip(self.input_means.iter().zip(&self.input_stds))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect())
    }

    pub fn destandardize_target(&self, value: f64) -> f64 {
        self.target_mean + self.target_std * value
    }

    pub fn standardize_target(&self, value: f64) -> f64 {
        (value - self.target_mean) / self.target_std
    }
}

fn column_label(names: Option<&[String]>, index: usize, dims: usize) -> String {
    match names {
        Some(names) if index < names.len() => names[index].clone(),
        _ if index == dims => format!("target (index {index})"),
        _ => format!("column {index}"),
    }
}

/// Shifts every input column and the targets to mean zero and unit
/// (population) standard deviation. Constant columns cannot be scaled
/// and are an error rather than being silently dropped.
pub fn standardize(data: &Dataset) -> Result<(Dataset, StandardizationStats)> {
    let n = data.len() as f64;
    let dims = data.dims();
    let mut input_means = Vec::with_capacity(dims);
    let mut input_stds = Vec::with_capacity(dims);
    for j in 0..dims {
        let col = data.inputs.column(j);
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std <= 1e-12 * mean.abs().max(1.0) {
            return Err(Error::ConstantColumn {
                column: column_label(data.column_names(), j, dims),
            });
        }
        input_means.push(mean);
        input_stds.push(std);
    }
    let target_mean = data.targets.sum() / n;
    let target_var = data
        .targets
        .iter()
        .map(|v| (v - target_mean) * (v - target_mean))
        .sum::<f64>()
        / n;
    let target_std = target_var.sqrt();
    if target_std <= 1e-12 * target_mean.abs().max(1.0) {
        return Err(Error::ConstantColumn {
            column: column_label(data.column_names(), dims, dims),
        });
    }

    let stats = StandardizationStats {
        input_means,
        input_stds,
        target_mean,
        target_std,
    };
    let inputs = DMatrix::from_fn(data.len(), dims, |i, j| {
        (data.inputs[(i, j)] - stats.input_means[j]) / stats.input_stds[j]
    });
    let targets = data.targets.map(|v| stats.standardize_target(v));
    Ok((
        Dataset {
            inputs,
            targets,
            column_names: data.column_names.clone(),
        },
        stats,
    ))
}

/// Maps standardized target values back to original units.
pub fn destandardize_targets(values: &[f64], stats: &StandardizationStats) -> Vec<f64> {
    values
        .iter()
        .map(|&v| stats.destandardize_target(v))
        .collect()
}

/// Seeded random partition into train and test rows. The train size is
/// `round(N·fraction)` clamped so both parts stay nonempty.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::invalid(
            "need at least two rows to split into nonempty parts",
        ));
    }
    let train_n = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train = data.subset(&indices[..train_n]);
    let test = data.subset(&indices[train_n..]);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn toy(n: usize, d: usize) -> Dataset {
        let inputs = DMatrix::from_fn(n, d, |i, j| {
            ((i * d + j) as f64 * 0.37 - 1.0).sin() + j as f64
        });
        let targets = DVector::from_fn(n, |i, _| (i as f64).sin() * 2.0 + 0.5);
        Dataset::new(inputs, targets, None).unwrap()
    }

    #[test]
    fn dataset_validation() {
        let inputs = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let targets = DVector::from_vec(vec![1.0]);
        assert!(Dataset::new(inputs.clone(), targets, None).is_err());
        let bad = DVector::from_vec(vec![1.0, f64::NAN]);
        assert!(Dataset::new(inputs, bad, None).is_err());
    }

    #[test]
    fn standardize_centers_and_scales() {
        let data = toy(20, 3);
        let (std_data, _) = standardize(&data).unwrap();
        let n = std_data.len() as f64;
        for j in 0..3 {
            let col = std_data.inputs().column(j);
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-10);
            assert_relative_eq!(var.sqrt(), 1.0, max_relative = 1e-10);
        }
        let tmean = std_data.targets().sum() / n;
        assert!(tmean.abs() < 1e-10);

        // Idempotent up to tolerance.
        let (again, stats2) = standardize(&std_data).unwrap();
        for (a, b) in again.targets().iter().zip(std_data.targets().iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(stats2.target_mean.abs() < 1e-10);
        assert_relative_eq!(stats2.target_std, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let inputs = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let targets = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let names = Some(vec!["a".into(), "b".into(), "y".into()]);
        let data = Dataset::new(inputs, targets, names).unwrap();
        match standardize(&data) {
            Err(Error::ConstantColumn { column }) => assert_eq!(column, "b"),
            other => panic!("expected constant-column error, got {other:?}"),
        }
    }

    #[test]
    fn destandardize_round_trips() {
        let data = toy(15, 2);
        let (std_data, stats) = standardize(&data).unwrap();
        let std_targets: Vec<f64> = std_data.targets().iter().copied().collect();
        let back = destandardize_targets(&std_targets, &stats);
        for (orig, b) in data.targets().iter().zip(back) {
            assert!((orig - b).abs() < 1e-12);
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let data = toy(10, 2);
        let (train, test) = split(&data, 0.9, 42).unwrap();
        assert_eq!(train.len(), 9);
        assert_eq!(test.len(), 1);

        // Extreme fraction rounds into the nonempty clamp.
        let (train, test) = split(&data, 0.999, 42).unwrap();
        assert_eq!(train.len(), 9);
        assert_eq!(test.len(), 1);

        let (a1, b1) = split(&data, 0.7, 7).unwrap();
        let (a2, b2) = split(&data, 0.7, 7).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);

        assert!(split(&data, 0.0, 1).is_err());
        assert!(split(&data, 1.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 2usize..40, seed in 0u64..1000, frac in 0.05f64..0.95) {
            let data = toy(n, 2);
            let (train, test) = split(&data, frac, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), n);
            // Multiset equality via sorted row signatures.
            let signature = |ds: &Dataset| {
                let mut rows: Vec<String> = (0..ds.len())
                    .map(|i| format!("{:?}|{}", ds.input_row(i), ds.targets()[i]))
                    .collect();
                rows.sort();
                rows
            };
            let mut combined: Vec<String> = signature(&train);
            combined.extend(signature(&test));
            combined.sort();
            prop_assert_eq!(combined, signature(&data));
        }

        #[test]
        fn standardize_round_trip_property(n in 2usize..30) {
            let data = toy(n, 3);
            let (std_data, stats) = standardize(&data).unwrap();
            let std_targets: Vec<f64> = std_data.targets().iter().copied().collect();
            let back = destandardize_targets(&std_targets, &stats);
            for (orig, b) in data.targets().iter().zip(back) {
                prop_assert!((orig - b).abs() < 1e-12);
            }
        }
    }
}

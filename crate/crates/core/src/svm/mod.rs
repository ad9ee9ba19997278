//! Two-class support vector machine with linear and RBF kernels.
//!
//! Labels are `-1` / `+1`. A trained [`SvmModel`] keeps only the support
//! vectors and their signed multipliers `v_i = alpha_i y_i`; the decision
//! value for `x` is `sum_i v_i K(sv_i, x) + b`.

mod model;
mod smo;

pub use model::{FaultClassifier, Standardizer};
pub use smo::{train, train_with, SolverOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// `exp(-||x - y||^2 / (2 sigma^2))`
    Rbf { sigma: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { sigma } if !(sigma.is_finite() && sigma > 0.0) => Err(
                Error::InvalidConfig(format!("RBF sigma must be positive, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x1: &[f64], x2: &[f64]) -> Result<f64> {
        if x1.len() != x2.len() {
            return Err(Error::DimensionMismatch {
                expected: x1.len(),
                found: x2.len(),
            });
        }
        self.validate()?;
        Ok(self.eval_unchecked(x1, x2))
    }

    /// Kernel value for equal-length inputs.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x1: &[f64], x2: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => x1.iter().zip(x2).map(|(a, b)| a * b).sum(),
            Kernel::Rbf { sigma } => {
                let d2: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Training or evaluation points with `-1` / `+1` targets.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: Vec<Vec<f64>>,
    labels: Vec<i8>,
    dim: usize,
}

impl LabeledDataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: labels.len(),
            });
        }
        let dim = points.first().map_or(0, Vec::len);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format("feature values must be finite".into()));
            }
        }
        if let Some(&y) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::Format(format!("label must be -1 or +1, got {y}")));
        }
        Ok(Self {
            points,
            labels,
            dim,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&1) && self.labels.contains(&-1)
    }

    /// Same points with every label negated.
    pub fn flipped(&self) -> Self {
        Self {
            points: self.points.clone(),
            labels: self.labels.iter().map(|y| -y).collect(),
            dim: self.dim,
        }
    }
}

/// Solver diagnostics kept alongside a model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub kkt_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    /// `None` is the hard-margin (separable) case.
    pub box_c: Option<f64>,
    pub support_vectors: Vec<Vec<f64>>,
    /// `v_i = alpha_i y_i`, one per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    #[serde(default)]
    pub stats: SolverStats,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// `sum_i v_i K(sv_i, x) + b`, the argument of the sign.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if !self.support_vectors.is_empty() && x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, v)| v * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// Class of `x`; a decision value of exactly zero maps to `+1`.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(sign(self.decision_value(x)?))
    }

    /// Dual objective `sum alpha_i - 1/2 sum_ij v_i v_j K(sv_i, sv_j)` at the
    /// trained multipliers.
    pub fn dual_objective(&self) -> f64 {
        let linear: f64 = self.coefficients.iter().map(|v| v.abs()).sum();
        let mut quad = 0.0;
        for (si, vi) in self.support_vectors.iter().zip(&self.coefficients) {
            for (sj, vj) in self.support_vectors.iter().zip(&self.coefficients) {
                quad += vi * vj * self.kernel.eval_unchecked(si, sj);
            }
        }
        linear - 0.5 * quad
    }
}

pub(crate) fn sign(value: f64) -> i8 {
    if value >= 0.0 {
        1
    } else {
        -1
    }
}

/// Accuracy and confusion counts. `confusion[actual][predicted]`, index 0 for
/// `-1` and 1 for `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub confusion: [[usize; 2]; 2],
    pub total: usize,
}

impl Evaluation {
    pub fn correct(&self) -> usize {
        self.confusion[0][0] + self.confusion[1][1]
    }
}

pub(crate) fn tally(pairs: impl IntoIterator<Item = (i8, i8)>) -> Result<Evaluation> {
    let mut confusion = [[0usize; 2]; 2];
    let mut total = 0;
    for (actual, predicted) in pairs {
        let row = usize::from(actual > 0);
        let col = usize::from(predicted > 0);
        confusion[row][col] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let correct = confusion[0][0] + confusion[1][1];
    Ok(Evaluation {
        accuracy: correct as f64 / total as f64,
        confusion,
        total,
    })
}

pub fn evaluate(model: &SvmModel, data: &LabeledDataset) -> Result<Evaluation> {
    let predictions = data
        .points()
        .iter()
        .map(|x| model.predict(x))
        .collect::<Result<Vec<_>>>()?;
    tally(data.labels().iter().copied().zip(predictions))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        let rbf = Kernel::Rbf { sigma: 0.7 };
        assert_eq!(rbf.eval(&[1.0, -2.0], &[1.0, -2.0]).unwrap(), 1.0);
        // ||x1 - x2|| = sigma * sqrt(2) gives exp(-1).
        let d = 0.7 * std::f64::consts::SQRT_2;
        let v = rbf.eval(&[0.0, 0.0], &[d, 0.0]).unwrap();
        assert!((v - 0.36787944117144233).abs() < 1e-12);
        assert_eq!(Kernel::Linear.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert!(matches!(
            Kernel::Linear.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Kernel::Rbf { sigma: 0.0 }.eval(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn sign_tie_break() {
        let model = |bias| SvmModel {
            kernel: Kernel::Linear,
            box_c: None,
            support_vectors: vec![vec![1.0]],
            coefficients: vec![0.0],
            bias,
            stats: SolverStats::default(),
        };
        assert_eq!(model(0.5).predict(&[3.0]).unwrap(), 1);
        assert_eq!(model(-0.5).predict(&[3.0]).unwrap(), -1);
        assert_eq!(model(0.0).predict(&[3.0]).unwrap(), 1);
        assert!(model(0.0).predict(&[3.0, 1.0]).is_err());
    }

    #[test]
    fn dataset_validation() {
        assert!(LabeledDataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![1, -1]).is_err());
        assert!(LabeledDataset::new(vec![vec![1.0]], vec![0]).is_err());
        assert!(LabeledDataset::new(vec![vec![f64::NAN]], vec![1]).is_err());
        let d = LabeledDataset::new(vec![vec![1.0]], vec![1]).unwrap();
        assert!(!d.has_both_classes());
    }

    #[test]
    fn empty_evaluation_is_an_error() {
        assert!(matches!(tally([]), Err(Error::EmptyDataset)));
    }
}

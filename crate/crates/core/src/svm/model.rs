use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{sign, tally, train, Evaluation, Kernel, LabeledDataset, SvmModel};
use crate::error::{Error, Result};

/// Per-dimension affine scaling to zero mean and unit variance.
///
/// Dimensions with zero variance on the fitting data are only centred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(points: &[Vec<f64>]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyDataset)?;
        let d = first.len();
        let n = points.len() as f64;
        let mut mean = vec![0.0; d];
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for p in points {
            for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(x
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    pub fn transform_dataset(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        let points = data
            .points()
            .iter()
            .map(|p| self.transform(p))
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::new(points, data.labels().to_vec())
    }
}

const FORMAT_NAME: &str = "gearscan-svm";
const FORMAT_VERSION: u32 = 1;

/// A trained SVM together with the feature scaling it was trained under.
/// This is what the CLI writes to and reads from model files.
///
/// On disk it is a JSON object:
///
/// ```json
/// {
///   "format": "gearscan-svm",
///   "version": 1,
///   "standardizer": { "mean": [..], "scale": [..] } | null,
///   "model": {
///     "kernel": { "kind": "rbf", "sigma": 1.5 } | { "kind": "linear" },
///     "box_c": 10.0 | null,
///     "support_vectors": [[..], ..],
///     "coefficients": [..],
///     "bias": 0.0,
///     "stats": { "iterations": 0, "kkt_residual": 0.0 }
///   }
/// }
/// ```
///
/// Numbers are written in shortest round-trip form, so a reloaded model
/// reproduces decision values exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultClassifier {
    pub format: String,
    pub version: u32,
    pub standardizer: Option<Standardizer>,
    pub model: SvmModel,
}

impl FaultClassifier {
    pub fn new(standardizer: Option<Standardizer>, model: SvmModel) -> Self {
        Self {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            standardizer,
            model,
        }
    }

    /// Fit the scaling on `data`, then train on the scaled points.
    pub fn fit(data: &LabeledDataset, kernel: Kernel, box_c: Option<f64>, standardize: bool) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let standardizer = standardize
            .then(|| Standardizer::fit(data.points()))
            .transpose()?;
        let model = match &standardizer {
            Some(s) => train(&s.transform_dataset(data)?, kernel, box_c)?,
            None => train(data, kernel, box_c)?,
        };
        Ok(Self::new(standardizer, model))
    }

    pub fn dim(&self) -> usize {
        match &self.standardizer {
            Some(s) => s.dim(),
            None => self.model.dim(),
        }
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        match &self.standardizer {
            Some(s) => self.model.decision_value(&s.transform(x)?),
            None => self.model.decision_value(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(sign(self.decision_value(x)?))
    }

    pub fn evaluate(&self, data: &LabeledDataset) -> Result<Evaluation> {
        let predictions = data
            .points()
            .iter()
            .map(|x| self.predict(x))
            .collect::<Result<Vec<_>>>()?;
        tally(data.labels().iter().copied().zip(predictions))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(format!("model: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("model: {e}")))?;
        if model.format != FORMAT_NAME || model.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported model format {} v{}",
                model.format, model.version
            )));
        }
        model.model.kernel.validate()?;
        let m = &model.model;
        if m.support_vectors.len() != m.coefficients.len() {
            return Err(Error::Format(
                "model has differing support vector and coefficient counts".into(),
            ));
        }
        let d = model.dim();
        if let Some(sv) = m.support_vectors.iter().find(|sv| sv.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: sv.len(),
            });
        }
        if let Some(s) = &model.standardizer {
            if s.scale.len() != d || s.scale.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Format("model standardizer is malformed".into()));
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> LabeledDataset {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let t = i as f64;
            pts.push(vec![100.0 + (t * 1.7).sin() * 5.0, 3.0 + (t * 0.3).cos()]);
            labels.push(-1);
            pts.push(vec![140.0 + (t * 2.3).cos() * 5.0, 3.5 + (t * 0.9).sin()]);
            labels.push(1);
        }
        LabeledDataset::new(pts, labels).unwrap()
    }

    #[test]
    fn standardizer_moments() {
        let s = Standardizer::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        assert_eq!(s.transform(&[3.0, 7.0]).unwrap(), vec![1.0, 2.0]);
        assert!(s.transform(&[1.0]).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let data = blobs();
        let clf = FaultClassifier::fit(&data, Kernel::Rbf { sigma: 1.5 }, Some(10.0), true).unwrap();
        let back = FaultClassifier::from_json(&clf.to_json().unwrap()).unwrap();
        assert_eq!(back, clf);
        for p in data.points() {
            let a = clf.decision_value(p).unwrap();
            let b = back.decision_value(p).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(clf.evaluate(&data).unwrap().accuracy, 1.0);
    }

    #[test]
    fn unbounded_box_serializes_as_null() {
        let clf = FaultClassifier::fit(&blobs(), Kernel::Linear, None, true).unwrap();
        let text = clf.to_json().unwrap();
        assert!(text.contains("\"box_c\": null"));
        assert_eq!(FaultClassifier::from_json(&text).unwrap().model.box_c, None);
    }

    #[test]
    fn rejects_foreign_documents() {
        assert!(FaultClassifier::from_json("{}").is_err());
        let clf = FaultClassifier::fit(&blobs(), Kernel::Linear, None, false).unwrap();
        let text = clf.to_json().unwrap().replace("gearscan-svm", "other");
        assert!(FaultClassifier::from_json(&text).is_err());
    }
}

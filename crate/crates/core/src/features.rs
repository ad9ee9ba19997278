//! Scale-distribution features: a histogram of the per-sample best scales
//! of a frame.
//!
//! Feature sets are exchanged as CSV with a header row
//! `frame_id,label,bin_0,...,bin_{n-1}`; `label` is `healthy`, `chipped` or
//! empty.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{scan_frame, OptimizerConfig, Parallelism};
use crate::signal::Frame;

pub const DEFAULT_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Healthy,
    Chipped,
}

impl ClassLabel {
    /// SVM target: healthy is -1, chipped is +1.
    pub fn target(self) -> i8 {
        match self {
            ClassLabel::Healthy => -1,
            ClassLabel::Chipped => 1,
        }
    }

    pub fn from_target(y: i8) -> Self {
        if y > 0 {
            ClassLabel::Chipped
        } else {
            ClassLabel::Healthy
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Healthy => "healthy",
            ClassLabel::Chipped => "chipped",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "healthy" => Ok(ClassLabel::Healthy),
            "chipped" => Ok(ClassLabel::Chipped),
            other => Err(Error::Format(format!(
                "unknown label {other:?} (expected healthy or chipped)"
            ))),
        }
    }
}

/// Equal-width bins over `[lower, upper]`. Bin `k` is
/// `[lower + k w, lower + (k + 1) w)` with `w = (upper - lower) / n_bins`;
/// the last bin is closed above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    pub n_bins: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self {
            n_bins: DEFAULT_BINS,
            lower: 1.0,
            upper: 32.0,
        }
    }
}

impl BinSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 {
            return Err(Error::InvalidConfig("n_bins must be positive".into()));
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::InvalidConfig(format!(
                "bin range [{}, {}] is not ordered",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    pub fn edge(&self, k: usize) -> f64 {
        if k == self.n_bins {
            return self.upper;
        }
        self.lower + k as f64 * (self.upper - self.lower) / self.n_bins as f64
    }

    pub fn bin_of(&self, scale: f64) -> Result<usize> {
        if !(scale >= self.lower && scale <= self.upper) {
            return Err(Error::ScaleOutOfRange {
                scale,
                lower: self.lower,
                upper: self.upper,
            });
        }
        let width = (self.upper - self.lower) / self.n_bins as f64;
        let mut k = (((scale - self.lower) / width) as usize).min(self.n_bins - 1);
        // Settle rounding so that membership always agrees with `edge`.
        while k + 1 < self.n_bins && scale >= self.edge(k + 1) {
            k += 1;
        }
        while k > 0 && scale < self.edge(k) {
            k -= 1;
        }
        Ok(k)
    }
}

/// One frame's histogram of best scales.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub frame_id: String,
    pub label: Option<ClassLabel>,
    pub bin_counts: Vec<u32>,
}

impl FeatureVector {
    pub fn total(&self) -> u64 {
        self.bin_counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.bin_counts.iter().map(|&c| f64::from(c)).collect()
    }
}

/// Count how many scales fall in each bin.
pub fn scale_distribution(scales: &[f64], bins: &BinSpec) -> Result<Vec<u32>> {
    bins.validate()?;
    let mut counts = vec![0u32; bins.n_bins];
    for &s in scales {
        counts[bins.bin_of(s)?] += 1;
    }
    Ok(counts)
}

/// Scan every sample of `frame` for its best scale and histogram the result.
pub fn extract_features(
    frame: &Frame,
    optimizer: &OptimizerConfig,
    bins: &BinSpec,
    frame_id: impl Into<String>,
    label: Option<ClassLabel>,
    parallelism: Parallelism,
) -> Result<FeatureVector> {
    let estimates = scan_frame(&frame.samples, optimizer, parallelism)?;
    let scales: Vec<f64> = estimates.iter().map(|e| e.scale).collect();
    Ok(FeatureVector {
        frame_id: frame_id.into(),
        label,
        bin_counts: scale_distribution(&scales, bins)?,
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("feature CSV: {e}"))
}

pub fn write_feature_csv<W: Write>(out: W, features: &[FeatureVector]) -> Result<()> {
    let n_bins = features
        .first()
        .map_or(DEFAULT_BINS, |f| f.bin_counts.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["frame_id".to_string(), "label".to_string()];
    header.extend((0..n_bins).map(|k| format!("bin_{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for f in features {
        if f.bin_counts.len() != n_bins {
            return Err(Error::DimensionMismatch {
                expected: n_bins,
                found: f.bin_counts.len(),
            });
        }
        let mut row = vec![
            f.frame_id.clone(),
            f.label.map(|l| l.to_string()).unwrap_or_default(),
        ];
        row.extend(f.bin_counts.iter().map(|c| c.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<FeatureVector>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.len() < 3 || &header[0] != "frame_id" || &header[1] != "label" {
        return Err(Error::Format(
            "feature CSV header must start with frame_id,label,bin_0".into(),
        ));
    }
    for (k, name) in header.iter().skip(2).enumerate() {
        if name != format!("bin_{k}") {
            return Err(Error::Format(format!(
                "feature CSV column {} is {name:?}, expected bin_{k}",
                k + 2
            )));
        }
    }
    let n_bins = header.len() - 2;
    let mut out = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = row + 2;
        if record.len() != n_bins + 2 {
            return Err(Error::Format(format!(
                "feature CSV line {line}: expected {} fields, found {}",
                n_bins + 2,
                record.len()
            )));
        }
        let label = match record[1].trim() {
            "" => None,
            s => Some(s.parse()?),
        };
        let bin_counts = record
            .iter()
            .skip(2)
            .map(|v| {
                v.trim().parse::<u32>().map_err(|_| {
                    Error::Format(format!("feature CSV line {line}: bad count {v:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(FeatureVector {
            frame_id: record[0].to_string(),
            label,
            bin_counts,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bin_mass() {
        let counts = scale_distribution(&[1.0; 1250], &BinSpec::default()).unwrap();
        assert_eq!(counts[0], 1250);
        assert_eq!(counts.iter().sum::<u32>(), 1250);
    }

    #[test]
    fn range_ends_land_in_first_and_last_bins() {
        let counts = scale_distribution(&[1.0, 32.0], &BinSpec::default()).unwrap();
        let mut expected = vec![0; 16];
        expected[0] = 1;
        expected[15] = 1;
        assert_eq!(counts, expected);
    }

    #[test]
    fn interior_edges_go_to_the_upper_bin() {
        let spec = BinSpec::default();
        for k in 1..16 {
            let edge = 1.0 + k as f64 * 31.0 / 16.0;
            assert_eq!(spec.bin_of(edge).unwrap(), k);
            assert_eq!(spec.bin_of(edge - 1e-9).unwrap(), k - 1);
        }
        // A range whose width is not a binary fraction.
        let odd = BinSpec {
            n_bins: 7,
            lower: 0.3,
            upper: 2.9,
        };
        for k in 1..7 {
            assert_eq!(odd.bin_of(odd.edge(k)).unwrap(), k);
        }
    }

    #[test]
    fn out_of_range_scale_is_an_error() {
        let spec = BinSpec::default();
        assert!(matches!(
            scale_distribution(&[0.99], &spec),
            Err(Error::ScaleOutOfRange { .. })
        ));
        assert!(scale_distribution(&[f64::NAN], &spec).is_err());
        assert!(scale_distribution(&[32.01], &spec).is_err());
    }

    #[test]
    fn csv_round_trip_and_header_only() {
        let fv = vec![
            FeatureVector {
                frame_id: "h0".into(),
                label: Some(ClassLabel::Healthy),
                bin_counts: (0..16).collect(),
            },
            FeatureVector {
                frame_id: "x".into(),
                label: None,
                bin_counts: vec![1; 16],
            },
        ];
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &fv).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("frame_id,label,bin_0,bin_1,"));
        assert_eq!(read_feature_csv(&buf[..]).unwrap(), fv);

        let mut empty = Vec::new();
        write_feature_csv(&mut empty, &[]).unwrap();
        assert!(read_feature_csv(&empty[..]).unwrap().is_empty());
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let bad_label = "frame_id,label,bin_0\na,broken,3\n";
        assert!(read_feature_csv(bad_label.as_bytes()).is_err());
        let bad_header = "id,label,bin_0\na,,3\n";
        assert!(read_feature_csv(bad_header.as_bytes()).is_err());
        let bad_count = "frame_id,label,bin_0\na,,-3\n";
        assert!(read_feature_csv(bad_count.as_bytes()).is_err());
    }
}

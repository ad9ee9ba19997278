//! Vibration signals: file ingestion, framing and a synthetic gearbox
//! generator.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::wavelet::morlet;

/// A uniformly sampled, finite, non-empty time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// A contiguous window of a parent signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub start_index: usize,
    pub samples: Vec<f64>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Read a signal stored as one decimal value per line.
///
/// Blank lines are rejected like any other unparseable line; the error
/// carries the 1-based line number.
pub fn load_signal(path: impl AsRef<Path>, sample_rate_hz: f64) -> Result<Signal> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let value: f64 = line.trim().parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("cannot parse {:?} as a number", line.trim()),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("non-finite sample {value}"),
            });
        }
        samples.push(value);
    }
    Signal::new(samples, sample_rate_hz)
}

/// Write samples one per line using the shortest representation that
/// parses back to the same `f64`.
pub fn write_signal(path: impl AsRef<Path>, samples: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for x in samples {
        writeln!(out, "{x}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Split into `floor(len / frame_length)` consecutive, non-overlapping
/// frames. A trailing remainder shorter than `frame_length` is dropped.
pub fn frame_signal(signal: &Signal, frame_length: usize) -> Result<Vec<Frame>> {
    if frame_length == 0 {
        return Err(Error::ZeroFrameLength);
    }
    if frame_length > signal.len() {
        return Err(Error::FrameTooLong {
            frame_length,
            signal_length: signal.len(),
        });
    }
    Ok(signal
        .samples()
        .chunks_exact(frame_length)
        .enumerate()
        .map(|(k, chunk)| Frame {
            start_index: k * frame_length,
            samples: chunk.to_vec(),
        })
        .collect())
}

/// Parameters of the synthetic gearbox vibration model.
///
/// The record is a gear-mesh sinusoid plus, for a chipped tooth, one
/// Morlet-shaped impact per driver revolution, plus white Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub shaft_speed_rpm: f64,
    pub driver_teeth: u32,
    pub driven_teeth: u32,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub mesh_amplitude: f64,
    /// Peak of each impact burst. Zero models a healthy gear.
    pub impulse_amplitude: f64,
    /// Inverse time scale of the impact burst (1/s). The burst is
    /// `morlet(rate * (t - t_k))`, so its envelope decays as
    /// `exp(-(rate * dt)^2 / 2)` and it rings at `5 * rate / 2pi` Hz.
    pub impulse_decay_rate: f64,
    pub noise_std: f64,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            shaft_speed_rpm: 1420.0,
            driver_teeth: 15,
            driven_teeth: 110,
            sample_rate_hz: 10_000.0,
            duration_s: 0.125,
            mesh_amplitude: 1.0,
            impulse_amplitude: 0.0,
            impulse_decay_rate: 2_000.0,
            noise_std: 0.1,
            rng_seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn mesh_frequency_hz(&self) -> f64 {
        self.shaft_speed_rpm / 60.0 * f64::from(self.driver_teeth)
    }

    pub fn revolution_period_s(&self) -> f64 {
        60.0 / self.shaft_speed_rpm
    }

    pub fn impulse_frequency_hz(&self) -> f64 {
        5.0 * self.impulse_decay_rate / (2.0 * PI)
    }

    pub fn is_healthy(&self) -> bool {
        self.impulse_amplitude == 0.0
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    /// Times (s) of the impact burst centres: one per driver revolution,
    /// `round(duration * rev/s)` of them, centred mid-revolution.
    pub fn burst_centers_s(&self) -> Vec<f64> {
        if self.is_healthy() {
            return Vec::new();
        }
        let period = self.revolution_period_s();
        let count = (self.duration_s / period).round() as usize;
        (0..count).map(|k| (k as f64 + 0.5) * period).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} must be non-negative, got {v}"
                )))
            }
        };
        positive("shaft_speed_rpm", self.shaft_speed_rpm)?;
        positive("sample_rate_hz", self.sample_rate_hz)?;
        positive("duration_s", self.duration_s)?;
        positive("impulse_decay_rate", self.impulse_decay_rate)?;
        non_negative("mesh_amplitude", self.mesh_amplitude)?;
        non_negative("impulse_amplitude", self.impulse_amplitude)?;
        non_negative("noise_std", self.noise_std)?;
        if self.driver_teeth == 0 || self.driven_teeth == 0 {
            return Err(Error::InvalidConfig("tooth counts must be positive".into()));
        }
        if self.sample_count() == 0 {
            return Err(Error::InvalidConfig(format!(
                "duration {} s is shorter than one sample",
                self.duration_s
            )));
        }
        let nyquist_hz = self.sample_rate_hz / 2.0;
        if self.mesh_frequency_hz() >= nyquist_hz {
            return Err(Error::Nyquist {
                what: "gear mesh frequency",
                frequency_hz: self.mesh_frequency_hz(),
                nyquist_hz,
            });
        }
        if !self.is_healthy() && self.impulse_frequency_hz() >= nyquist_hz {
            return Err(Error::Nyquist {
                what: "impact ringing frequency",
                frequency_hz: self.impulse_frequency_hz(),
                nyquist_hz,
            });
        }
        Ok(())
    }
}

/// Render a synthetic gearbox record. Pure in `config`: equal configs give
/// bitwise-equal signals.
pub fn synthesize_gearbox(config: &SynthConfig) -> Result<Signal> {
    config.validate()?;
    let n = config.sample_count();
    let fs = config.sample_rate_hz;
    let mesh_omega = 2.0 * PI * config.mesh_frequency_hz();

    let mut samples: Vec<f64> = (0..n)
        .map(|i| config.mesh_amplitude * (mesh_omega * i as f64 / fs).sin())
        .collect();

    // The Morlet envelope is below 1e-14 beyond |t| = 8.
    let reach_s = 8.0 / config.impulse_decay_rate;
    for center in config.burst_centers_s() {
        let lo = ((center - reach_s) * fs).ceil().max(0.0) as usize;
        let hi = (((center + reach_s) * fs).floor() as usize).min(n - 1);
        for (i, x) in samples.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let t = i as f64 / fs - center;
            *x += config.impulse_amplitude * morlet(config.impulse_decay_rate * t);
        }
    }

    if config.noise_std > 0.0 {
        let normal = Normal::new(0.0, config.noise_std)
            .map_err(|e| Error::InvalidConfig(format!("noise_std: {e}")))?;
        let mut rng = rng::seeded(config.rng_seed);
        for x in samples.iter_mut() {
            *x += normal.sample(&mut rng);
        }
    }

    Signal::new(samples, fs)
}

//! The pipeline configuration document (TOML).
//!
//! Every key is optional and defaults to the reference setup. A complete
//! document with defaults spelled out:
//!
//! ```toml
//! seed = 2024
//! frame_length = 1250
//! optimizer = "pso"        # or "ga"
//! n_bins = 16
//! scale_min = 1.0
//! scale_max = 32.0
//! threads = 1
//!
//! [synth]                  # built-in signal source (default)
//! healthy_frames = 80
//! chipped_frames = 80
//! shaft_speed_rpm = 1420.0
//! driver_teeth = 15
//! driven_teeth = 110
//! sample_rate_hz = 10000.0
//! mesh_amplitude = 1.0
//! impulse_amplitude = 6.0  # used for chipped frames only
//! impulse_decay_rate = 2000.0
//! noise_std = 0.1
//!
//! # [input]                # file source, mutually exclusive with [synth]
//! # path = "signal.txt"
//! # sample_rate_hz = 10000.0
//! # label = "healthy"
//!
//! [pso]
//! inertia = 0.4
//! c1 = 2.0
//! c2 = 2.0
//! # v_max = 4.0            # absent: unbounded
//! population = 20
//! max_generations = 50
//! stall_time_limit_s = 20.0
//! time_limit_s = 30.0
//!
//! [ga]
//! population = 20
//! elite_count = 4
//! mutation_probability = 0.01
//! crossover_fraction = 0.8
//! max_generations = 50
//! fitness_tolerance = 1e-9
//! stall_generations = 50
//!
//! [svm]
//! kernel = "rbf"           # or "linear"
//! sigma = 1.5
//! box_c = 10.0             # inf for a hard margin
//! standardize = true
//! train_count = 60
//! test_count = 100
//!
//! [compare]
//! translations = 20
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{BinSpec, ClassLabel};
use crate::optim::{GaConfig, OptimizerConfig, SwarmConfig};
use crate::rng::mix_seed;
use crate::signal::SynthConfig;
use crate::svm::Kernel;

/// Seed streams derived from the document's `seed`.
pub mod streams {
    pub const HEALTHY_SIGNAL: u64 = 1;
    pub const CHIPPED_SIGNAL: u64 = 2;
    pub const OPTIMIZER: u64 = 3;
    pub const SPLIT: u64 = 4;
    pub const COMPARE: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Pso,
    Ga,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub frame_length: usize,
    pub optimizer: OptimizerKind,
    pub n_bins: usize,
    pub scale_min: f64,
    pub scale_max: f64,
    pub threads: usize,
    pub synth: Option<SynthSection>,
    pub input: Option<InputSection>,
    pub pso: PsoSection,
    pub ga: GaSection,
    pub svm: SvmSection,
    pub compare: CompareSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            frame_length: 1250,
            optimizer: OptimizerKind::Pso,
            n_bins: 16,
            scale_min: 1.0,
            scale_max: 32.0,
            threads: 1,
            synth: None,
            input: None,
            pso: PsoSection::default(),
            ga: GaSection::default(),
            svm: SvmSection::default(),
            compare: CompareSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub healthy_frames: usize,
    pub chipped_frames: usize,
    pub shaft_speed_rpm: f64,
    pub driver_teeth: u32,
    pub driven_teeth: u32,
    pub sample_rate_hz: f64,
    pub mesh_amplitude: f64,
    pub impulse_amplitude: f64,
    pub impulse_decay_rate: f64,
    pub noise_std: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let base = SynthConfig::default();
        Self {
            healthy_frames: 80,
            chipped_frames: 80,
            shaft_speed_rpm: base.shaft_speed_rpm,
            driver_teeth: base.driver_teeth,
            driven_teeth: base.driven_teeth,
            sample_rate_hz: base.sample_rate_hz,
            mesh_amplitude: base.mesh_amplitude,
            impulse_amplitude: 6.0,
            impulse_decay_rate: base.impulse_decay_rate,
            noise_std: base.noise_std,
        }
    }
}

impl SynthSection {
    pub fn frames(&self, class: ClassLabel) -> usize {
        match class {
            ClassLabel::Healthy => self.healthy_frames,
            ClassLabel::Chipped => self.chipped_frames,
        }
    }

    /// Generator settings for one class record of `frames * frame_length`
    /// samples.
    pub fn synth_config(
        &self,
        class: ClassLabel,
        frames: usize,
        frame_length: usize,
        seed: u64,
    ) -> SynthConfig {
        SynthConfig {
            shaft_speed_rpm: self.shaft_speed_rpm,
            driver_teeth: self.driver_teeth,
            driven_teeth: self.driven_teeth,
            sample_rate_hz: self.sample_rate_hz,
            duration_s: (frames * frame_length) as f64 / self.sample_rate_hz,
            mesh_amplitude: self.mesh_amplitude,
            impulse_amplitude: match class {
                ClassLabel::Healthy => 0.0,
                ClassLabel::Chipped => self.impulse_amplitude,
            },
            impulse_decay_rate: self.impulse_decay_rate,
            noise_std: self.noise_std,
            rng_seed: seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub path: PathBuf,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    #[serde(default)]
    pub label: Option<ClassLabel>,
}

fn default_rate() -> f64 {
    10_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoSection {
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: Option<f64>,
    pub population: usize,
    pub max_generations: usize,
    pub stall_time_limit_s: f64,
    pub time_limit_s: f64,
}

impl Default for PsoSection {
    fn default() -> Self {
        let d = SwarmConfig::default();
        Self {
            inertia: d.inertia,
            c1: d.c1,
            c2: d.c2,
            v_max: d.v_max,
            population: d.population,
            max_generations: d.max_generations,
            stall_time_limit_s: d.stall_time_limit_s,
            time_limit_s: d.time_limit_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub population: usize,
    pub elite_count: usize,
    pub mutation_probability: f64,
    pub crossover_fraction: f64,
    pub max_generations: usize,
    pub fitness_tolerance: f64,
    pub stall_generations: usize,
}

impl Default for GaSection {
    fn default() -> Self {
        let d = GaConfig::default();
        Self {
            population: d.population,
            elite_count: d.elite_count,
            mutation_probability: d.mutation_probability,
            crossover_fraction: d.crossover_fraction,
            max_generations: d.max_generations,
            fitness_tolerance: d.fitness_tolerance,
            stall_generations: d.stall_generations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    pub kernel: KernelKind,
    pub sigma: f64,
    /// `inf` selects the hard-margin problem.
    pub box_c: f64,
    pub standardize: bool,
    pub train_count: usize,
    pub test_count: usize,
}

impl Default for SvmSection {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Rbf,
            sigma: 1.5,
            box_c: 10.0,
            standardize: true,
            train_count: 60,
            test_count: 100,
        }
    }
}

impl SvmSection {
    pub fn kernel(&self) -> Kernel {
        match self.kernel {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Rbf => Kernel::Rbf { sigma: self.sigma },
        }
    }

    pub fn box_constraint(&self) -> Option<f64> {
        self.box_c.is_finite().then_some(self.box_c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub translations: usize,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { translations: 20 }
    }
}

/// Where frames come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSource<'a> {
    Synth(&'a SynthSection),
    Input(&'a InputSection),
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => {
                Error::InvalidConfig(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.synth.is_some() && self.input.is_some() {
            return Err(Error::InvalidConfig(
                "[synth] and [input] are mutually exclusive".into(),
            ));
        }
        if self.frame_length == 0 {
            return Err(Error::ZeroFrameLength);
        }
        self.bins().validate()?;
        self.swarm_config().validate()?;
        self.ga_config().validate()?;
        self.svm.kernel().validate()?;
        if !(self.svm.box_c > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "box_c must be positive, got {}",
                self.svm.box_c
            )));
        }
        if let SignalSource::Synth(s) = self.source() {
            s.synth_config(ClassLabel::Chipped, 1, self.frame_length, 0)
                .validate()?;
        }
        Ok(())
    }

    /// `[input]` when present, otherwise `[synth]` (with defaults if the
    /// section is absent).
    pub fn source(&self) -> SignalSource<'_> {
        static DEFAULT_SYNTH: std::sync::OnceLock<SynthSection> = std::sync::OnceLock::new();
        match (&self.input, &self.synth) {
            (Some(input), _) => SignalSource::Input(input),
            (None, Some(synth)) => SignalSource::Synth(synth),
            (None, None) => SignalSource::Synth(DEFAULT_SYNTH.get_or_init(SynthSection::default)),
        }
    }

    pub fn synth_section(&self) -> SynthSection {
        self.synth.clone().unwrap_or_default()
    }

    pub fn bins(&self) -> BinSpec {
        BinSpec {
            n_bins: self.n_bins,
            lower: self.scale_min,
            upper: self.scale_max,
        }
    }

    pub fn swarm_config(&self) -> SwarmConfig {
        let p = &self.pso;
        SwarmConfig {
            inertia: p.inertia,
            c1: p.c1,
            c2: p.c2,
            v_max: p.v_max,
            lower_bound: self.scale_min,
            upper_bound: self.scale_max,
            population: p.population,
            max_generations: p.max_generations,
            stall_time_limit_s: p.stall_time_limit_s,
            time_limit_s: p.time_limit_s,
            rng_seed: self.stream_seed(streams::OPTIMIZER),
        }
    }

    pub fn ga_config(&self) -> GaConfig {
        let g = &self.ga;
        GaConfig {
            population: g.population,
            elite_count: g.elite_count,
            mutation_probability: g.mutation_probability,
            crossover_fraction: g.crossover_fraction,
            max_generations: g.max_generations,
            fitness_tolerance: g.fitness_tolerance,
            stall_generations: g.stall_generations,
            lower_bound: self.scale_min,
            upper_bound: self.scale_max,
            rng_seed: self.stream_seed(streams::OPTIMIZER),
        }
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        match self.optimizer {
            OptimizerKind::Pso => OptimizerConfig::Pso(self.swarm_config()),
            OptimizerKind::Ga => OptimizerConfig::Ga(self.ga_config()),
        }
    }

    pub fn stream_seed(&self, stream: u64) -> u64 {
        mix_seed(self.seed, stream)
    }
}

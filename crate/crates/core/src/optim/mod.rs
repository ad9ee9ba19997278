//! One-dimensional population-based maximizers and the per-translation
//! scale search built on them.

mod ga;
mod pso;
mod scan;

pub use ga::{ga_maximize, GaConfig};
pub use pso::{pso_maximize, SwarmConfig};
pub use scan::{best_scale_at, scan_frame, translation_seed, Parallelism, ScaleEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Why an optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxGenerations,
    StallTime,
    TimeLimit,
    FitnessTolerance,
}

/// Global-best snapshot taken after each generation (generation 0 is the
/// initial population).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub evaluations: usize,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best_position: f64,
    pub best_fitness: f64,
    pub generations_run: usize,
    pub fitness_evaluations: usize,
    pub wall_time_s: f64,
    pub termination: Termination,
    pub trace: Vec<GenerationRecord>,
}

impl OptimResult {
    /// Compare everything except wall-clock measurements.
    pub fn same_solution(&self, other: &Self) -> bool {
        self.best_position.to_bits() == other.best_position.to_bits()
            && self.best_fitness.to_bits() == other.best_fitness.to_bits()
            && self.generations_run == other.generations_run
            && self.fitness_evaluations == other.fitness_evaluations
            && self.termination == other.termination
            && self.trace.len() == other.trace.len()
            && self.trace.iter().zip(&other.trace).all(|(a, b)| {
                a.generation == b.generation
                    && a.best_fitness.to_bits() == b.best_fitness.to_bits()
                    && a.evaluations == b.evaluations
            })
    }

    /// Write the trace as CSV rows `generation,gb_fitness,evaluations,elapsed_s`.
    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["generation", "gb_fitness", "evaluations", "elapsed_s"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for r in &self.trace {
            w.write_record([
                r.generation.to_string(),
                r.best_fitness.to_string(),
                r.evaluations.to_string(),
                r.elapsed_s.to_string(),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Optimizer choice for the scale search.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerConfig {
    Pso(SwarmConfig),
    Ga(GaConfig),
}

impl OptimizerConfig {
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            OptimizerConfig::Pso(c) => (c.lower_bound, c.upper_bound),
            OptimizerConfig::Ga(c) => (c.lower_bound, c.upper_bound),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            OptimizerConfig::Pso(c) => c.rng_seed,
            OptimizerConfig::Ga(c) => c.rng_seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            OptimizerConfig::Pso(c) => OptimizerConfig::Pso(SwarmConfig {
                rng_seed: seed,
                ..c.clone()
            }),
            OptimizerConfig::Ga(c) => OptimizerConfig::Ga(GaConfig {
                rng_seed: seed,
                ..c.clone()
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OptimizerConfig::Pso(c) => c.validate(),
            OptimizerConfig::Ga(c) => c.validate(),
        }
    }

    pub fn maximize<F: FnMut(f64) -> f64>(&self, fitness: F) -> Result<OptimResult> {
        match self {
            OptimizerConfig::Pso(c) => pso_maximize(fitness, c),
            OptimizerConfig::Ga(c) => ga_maximize(fitness, c),
        }
    }
}

fn check_bounds(lower: f64, upper: f64) -> Result<()> {
    if lower.is_finite() && upper.is_finite() && lower < upper {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "bounds must be finite with lower < upper, got [{lower}, {upper}]"
        )))
    }
}

fn evaluate<F: FnMut(f64) -> f64>(fitness: &mut F, position: f64) -> Result<f64> {
    let value = fitness(position);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteFitness { position, value })
    }
}

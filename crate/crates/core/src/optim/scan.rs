use rayon::prelude::*;

use super::OptimizerConfig;
use crate::error::{Error, Result};
use crate::rng::mix_seed;
use crate::wavelet::{shape_fitness, shape_fitness_fast};

/// Best Morlet scale found at one translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleEstimate {
    pub translation: usize,
    pub scale: f64,
    pub fitness: f64,
    /// The signal window under the best daughter was all zeros.
    pub degenerate: bool,
}

/// How `scan_frame` distributes translations over threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Serial,
    /// Run on a dedicated pool of this many threads; 0 uses rayon's global
    /// pool.
    Threads(usize),
}

/// Seed for the optimizer run at `translation` under `base`.
pub fn translation_seed(base: u64, translation: usize) -> u64 {
    mix_seed(base, translation as u64)
}

/// Search the scale maximizing the shape fitness at `translation`.
///
/// The optimizer runs as configured, seed included; [`scan_frame`] is the
/// place that derives per-translation seeds.
pub fn best_scale_at(
    signal: &[f64],
    translation: usize,
    optimizer: &OptimizerConfig,
) -> Result<ScaleEstimate> {
    if translation >= signal.len() {
        return Err(Error::TranslationOutOfRange {
            translation: translation as f64,
            length: signal.len(),
        });
    }
    let (lo, _) = optimizer.bounds();
    if !(lo > 0.0) {
        return Err(Error::InvalidScale(lo));
    }
    let b = translation as f64;
    let result = optimizer.maximize(|a| shape_fitness_fast(signal, a, b).fitness)?;
    let at_best = shape_fitness(signal, result.best_position, b)?;
    Ok(ScaleEstimate {
        translation,
        scale: result.best_position,
        fitness: result.best_fitness,
        degenerate: at_best.degenerate,
    })
}

/// Best scale at every sample of `samples`, in ascending translation order.
///
/// The run at translation `b` is seeded with
/// `translation_seed(optimizer.seed(), b)`, so results are identical for
/// any degree of parallelism.
pub fn scan_frame(
    samples: &[f64],
    optimizer: &OptimizerConfig,
    parallelism: Parallelism,
) -> Result<Vec<ScaleEstimate>> {
    optimizer.validate()?;
    let base = optimizer.seed();
    let one = |b: usize| best_scale_at(samples, b, &optimizer.with_seed(translation_seed(base, b)));
    match parallelism {
        Parallelism::Serial => (0..samples.len()).map(one).collect(),
        Parallelism::Threads(0) => (0..samples.len()).into_par_iter().map(one).collect(),
        Parallelism::Threads(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(|| (0..samples.len()).into_par_iter().map(one).collect())
        }
    }
}

use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_bounds, evaluate, GenerationRecord, OptimResult, Termination};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Real-coded genetic algorithm settings. Defaults: population 20, 4
/// elites, 1% uniform mutation, 80% crossover fraction, 50 generations,
/// function tolerance 1e-9, space [1, 32].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub elite_count: usize,
    pub mutation_probability: f64,
    pub crossover_fraction: f64,
    pub max_generations: usize,
    pub fitness_tolerance: f64,
    /// Window (in generations) over which the best-fitness gain is compared
    /// against `fitness_tolerance`.
    pub stall_generations: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 20,
            elite_count: 4,
            mutation_probability: 0.01,
            crossover_fraction: 0.8,
            max_generations: 50,
            fitness_tolerance: 1e-9,
            stall_generations: 50,
            lower_bound: 1.0,
            upper_bound: 32.0,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        check_bounds(self.lower_bound, self.upper_bound)?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population < 2 {
            return bad(format!("population must be at least 2, got {}", self.population));
        }
        if self.elite_count >= self.population {
            return bad(format!(
                "elite_count {} must be below population {}",
                self.elite_count, self.population
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability)
            || !(0.0..=1.0).contains(&self.crossover_fraction)
        {
            return bad("mutation_probability and crossover_fraction must lie in [0, 1]".into());
        }
        if self.max_generations < 1 || self.stall_generations < 1 {
            return bad("max_generations and stall_generations must be at least 1".into());
        }
        if !(self.fitness_tolerance > 0.0) {
            return bad("fitness_tolerance must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Individual {
    gene: f64,
    fitness: f64,
}

fn tournament(rng: &mut Rng, pop: &[Individual]) -> f64 {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    if b.fitness > a.fitness {
        b.gene
    } else {
        a.gene
    }
}

/// Maximize `fitness` over `[lower_bound, upper_bound]` with a real-coded GA.
///
/// Each generation keeps the `elite_count` best individuals unchanged and
/// breeds the rest from size-2 tournament winners: a `crossover_fraction`
/// share by crossover (the child lies uniformly between its parents, then
/// is resampled uniformly within bounds with `mutation_probability`) and
/// the remainder by uniform mutation, which for a single gene is a fresh
/// uniform draw. The whole new population is evaluated, elites included.
///
/// Stops after `max_generations`, or once the best fitness has gained less
/// than `fitness_tolerance` over the last `stall_generations` generations.
pub fn ga_maximize<F>(mut fitness: F, config: &GaConfig) -> Result<OptimResult>
where
    F: FnMut(f64) -> f64,
{
    config.validate()?;
    let start = Instant::now();
    let mut rng = rng::seeded(config.rng_seed);
    let (lo, hi) = (config.lower_bound, config.upper_bound);

    let mut pop = Vec::with_capacity(config.population);
    for _ in 0..config.population {
        let gene = rng.random_range(lo..=hi);
        pop.push(Individual {
            gene,
            fitness: evaluate(&mut fitness, gene)?,
        });
    }
    let mut evaluations = config.population;
    let by_fitness = |a: &Individual, b: &Individual| b.fitness.total_cmp(&a.fitness);
    pop.sort_by(by_fitness);

    let mut best = pop[0];
    let mut trace = vec![GenerationRecord {
        generation: 0,
        best_fitness: best.fitness,
        evaluations,
        elapsed_s: start.elapsed().as_secs_f64(),
    }];
    let mut termination = Termination::MaxGenerations;
    let mut generations_run = 0;

    let n_children = config.population - config.elite_count;
    let n_crossover = (config.crossover_fraction * n_children as f64).round() as usize;
    let mut genes = Vec::with_capacity(config.population);

    for generation in 1..=config.max_generations {
        genes.clear();
        genes.extend(pop[..config.elite_count].iter().map(|i| i.gene));
        for k in 0..n_children {
            let child = if k < n_crossover {
                let p1 = tournament(&mut rng, &pop);
                let p2 = tournament(&mut rng, &pop);
                let u: f64 = rng.random();
                let mut child = p1 + u * (p2 - p1);
                if rng.random::<f64>() < config.mutation_probability {
                    child = rng.random_range(lo..=hi);
                }
                child
            } else {
                // Mutating a one-gene parent replaces its only gene.
                rng.random_range(lo..=hi)
            };
            genes.push(child.clamp(lo, hi));
        }

        pop.clear();
        for &gene in &genes {
            pop.push(Individual {
                gene,
                fitness: evaluate(&mut fitness, gene)?,
            });
        }
        evaluations += config.population;
        pop.sort_by(by_fitness);
        if pop[0].fitness > best.fitness {
            best = pop[0];
        }
        generations_run = generation;
        trace.push(GenerationRecord {
            generation,
            best_fitness: best.fitness,
            evaluations,
            elapsed_s: start.elapsed().as_secs_f64(),
        });

        if generation == config.max_generations {
            break;
        }
        if generation >= config.stall_generations {
            let window_start = trace[generation - config.stall_generations].best_fitness;
            if best.fitness - window_start < config.fitness_tolerance {
                termination = Termination::FitnessTolerance;
                break;
            }
        }
    }

    Ok(OptimResult {
        best_position: best.gene,
        best_fitness: best.fitness,
        generations_run,
        fitness_evaluations: evaluations,
        wall_time_s: start.elapsed().as_secs_f64(),
        termination,
        trace,
    })
}

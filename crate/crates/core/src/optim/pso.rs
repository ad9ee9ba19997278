use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_bounds, evaluate, GenerationRecord, OptimResult, Termination};
use crate::error::{Error, Result};
use crate::rng;

/// Particle swarm settings. Defaults reproduce the reference setup:
/// c1 = c2 = 2, unbounded velocity, space [1, 32], 20 particles,
/// 50 generations, 20 s stall limit, 30 s time limit, plus an inertia
/// weight of 0.4 on the previous velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    /// Weight on the previous velocity. 1.0 gives the bare update
    /// `v + c1 r1 (pb - p) + c2 r2 (gb - p)`, whose oscillations grow
    /// without bound for c1 = c2 = 2; values in (1/3, 1/2) keep both the
    /// mean and the variance of the particle trajectories stable.
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    /// `None` leaves velocities unbounded.
    pub v_max: Option<f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub population: usize,
    pub max_generations: usize,
    pub stall_time_limit_s: f64,
    pub time_limit_s: f64,
    pub rng_seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            inertia: 0.4,
            c1: 2.0,
            c2: 2.0,
            v_max: None,
            lower_bound: 1.0,
            upper_bound: 32.0,
            population: 20,
            max_generations: 50,
            stall_time_limit_s: 20.0,
            time_limit_s: 30.0,
            rng_seed: 0,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        check_bounds(self.lower_bound, self.upper_bound)?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.c1 >= 0.0 && self.c1.is_finite() && self.c2 >= 0.0 && self.c2.is_finite()) {
            return bad(format!("c1, c2 must be non-negative, got {}, {}", self.c1, self.c2));
        }
        if !(self.inertia.is_finite() && self.inertia >= 0.0) {
            return bad(format!("inertia must be non-negative, got {}", self.inertia));
        }
        if let Some(v) = self.v_max {
            if !(v > 0.0) {
                return bad(format!("v_max must be positive, got {v}"));
            }
        }
        if self.population < 2 {
            return bad(format!("population must be at least 2, got {}", self.population));
        }
        if self.max_generations < 1 {
            return bad("max_generations must be at least 1".into());
        }
        if !(self.stall_time_limit_s > 0.0 && self.time_limit_s > 0.0) {
            return bad("time limits must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Particle {
    position: f64,
    velocity: f64,
    best_position: f64,
    best_fitness: f64,
}

/// Maximize `fitness` over `[lower_bound, upper_bound]`.
///
/// Update rule, per particle and generation, with fresh `r1, r2 ~ U(0, 1)`:
///
/// ```text
/// v <- w v + c1 r1 (pb - p) + c2 r2 (gb - p)
/// p <- p + v
/// ```
///
/// with `w` the configured inertia. Velocities are clipped to `v_max` when set;
/// a particle that leaves the space is put back on the bound it crossed
/// and its velocity is zeroed. The global best is refreshed once per
/// generation, after every particle has moved.
pub fn pso_maximize<F>(mut fitness: F, config: &SwarmConfig) -> Result<OptimResult>
where
    F: FnMut(f64) -> f64,
{
    config.validate()?;
    let start = Instant::now();
    let mut rng = rng::seeded(config.rng_seed);
    let (lo, hi) = (config.lower_bound, config.upper_bound);

    let mut swarm = Vec::with_capacity(config.population);
    for _ in 0..config.population {
        let p = rng.random_range(lo..=hi);
        let f = evaluate(&mut fitness, p)?;
        swarm.push(Particle {
            position: p,
            velocity: 0.0,
            best_position: p,
            best_fitness: f,
        });
    }
    let mut evaluations = config.population;

    let (mut gb_position, mut gb_fitness) = (swarm[0].best_position, swarm[0].best_fitness);
    for p in &swarm[1..] {
        if p.best_fitness > gb_fitness {
            gb_position = p.best_position;
            gb_fitness = p.best_fitness;
        }
    }

    let mut trace = vec![GenerationRecord {
        generation: 0,
        best_fitness: gb_fitness,
        evaluations,
        elapsed_s: start.elapsed().as_secs_f64(),
    }];
    let mut last_improvement = Instant::now();
    let mut termination = Termination::MaxGenerations;
    let mut generations_run = 0;

    for generation in 1..=config.max_generations {
        for particle in swarm.iter_mut() {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let mut v = config.inertia * particle.velocity
                + config.c1 * r1 * (particle.best_position - particle.position)
                + config.c2 * r2 * (gb_position - particle.position);
            if let Some(v_max) = config.v_max {
                v = v.clamp(-v_max, v_max);
            }
            let mut p = particle.position + v;
            if p < lo {
                p = lo;
                v = 0.0;
            } else if p > hi {
                p = hi;
                v = 0.0;
            }
            particle.position = p;
            particle.velocity = v;

            let f = evaluate(&mut fitness, p)?;
            if f > particle.best_fitness {
                particle.best_fitness = f;
                particle.best_position = p;
            }
        }
        evaluations += config.population;
        generations_run = generation;

        let mut improved = false;
        for p in &swarm {
            if p.best_fitness > gb_fitness {
                gb_fitness = p.best_fitness;
                gb_position = p.best_position;
                improved = true;
            }
        }
        if improved {
            last_improvement = Instant::now();
        }
        let elapsed = start.elapsed().as_secs_f64();
        trace.push(GenerationRecord {
            generation,
            best_fitness: gb_fitness,
            evaluations,
            elapsed_s: elapsed,
        });

        if generation == config.max_generations {
            break;
        }
        if elapsed >= config.time_limit_s {
            termination = Termination::TimeLimit;
            break;
        }
        if last_improvement.elapsed().as_secs_f64() >= config.stall_time_limit_s {
            termination = Termination::StallTime;
            break;
        }
    }

    Ok(OptimResult {
        best_position: gb_position,
        best_fitness: gb_fitness,
        generations_run,
        fitness_evaluations: evaluations,
        wall_time_s: start.elapsed().as_secs_f64(),
        termination,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: f64) -> f64 {
        -(x - 5.0) * (x - 5.0)
    }

    #[test]
    fn finds_quadratic_peak_across_seeds() {
        for seed in 0..20 {
            let cfg = SwarmConfig {
                rng_seed: seed,
                ..SwarmConfig::default()
            };
            let r = pso_maximize(quadratic, &cfg).unwrap();
            assert!(
                (r.best_position - 5.0).abs() < 1e-3,
                "seed {seed}: {}",
                r.best_position
            );
            assert_eq!(r.termination, Termination::MaxGenerations);
            assert_eq!(r.fitness_evaluations, 20 * 51);
            assert_eq!(r.trace.len(), 51);
        }
    }

    #[test]
    fn unit_inertia_is_the_bare_update() {
        // Without damping the swarm keeps oscillating around gb and only
        // gets within a few 1e-3 of the peak.
        let cfg = SwarmConfig {
            inertia: 1.0,
            ..SwarmConfig::default()
        };
        let r = pso_maximize(quadratic, &cfg).unwrap();
        assert!((r.best_position - 5.0).abs() < 0.1);
        assert!(r.trace.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
    }

    #[test]
    fn flat_landscape() {
        let r = pso_maximize(|_| 0.0, &SwarmConfig::default()).unwrap();
        assert_eq!(r.best_fitness, 0.0);
        assert!((1.0..=32.0).contains(&r.best_position));
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let cfg = SwarmConfig {
            rng_seed: 42,
            ..SwarmConfig::default()
        };
        let a = pso_maximize(|x| (x * 0.7).sin() * x, &cfg).unwrap();
        let b = pso_maximize(|x| (x * 0.7).sin() * x, &cfg).unwrap();
        assert!(a.same_solution(&b));
    }

    #[test]
    fn velocity_clamp_and_bounds() {
        let cfg = SwarmConfig {
            v_max: Some(0.5),
            ..SwarmConfig::default()
        };
        let mut seen = Vec::new();
        let r = pso_maximize(
            |x| {
                seen.push(x);
                x
            },
            &cfg,
        )
        .unwrap();
        assert!(seen.iter().all(|x| (1.0..=32.0).contains(x)));
        assert!(r.best_position <= 32.0);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let err = pso_maximize(|x| if x > 16.0 { f64::NAN } else { x }, &SwarmConfig::default())
            .unwrap_err();
        match err {
            Error::NonFiniteFitness { position, .. } => assert!(position > 16.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            SwarmConfig {
                lower_bound: 5.0,
                upper_bound: 5.0,
                ..SwarmConfig::default()
            },
            SwarmConfig {
                population: 1,
                ..SwarmConfig::default()
            },
            SwarmConfig {
                max_generations: 0,
                ..SwarmConfig::default()
            },
            SwarmConfig {
                v_max: Some(0.0),
                ..SwarmConfig::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(
                pso_maximize(quadratic, &cfg),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn gb_trace_is_monotone() {
        let cfg = SwarmConfig {
            rng_seed: 3,
            ..SwarmConfig::default()
        };
        let r = pso_maximize(|x| (x * 1.3).cos() + 0.01 * x, &cfg).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
    }
}

//! Pairwise coordinate ascent on the SVM dual.
//!
//! Solves
//!
//! ```text
//! max  sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
//! s.t. 0 <= alpha_i <= C,  sum_i alpha_i y_i = 0
//! ```
//!
//! by repeatedly picking the maximal-violating pair (second-order working
//! set selection) and optimizing it analytically, until the KKT gap
//! `max_{I_up} -y G - min_{I_low} -y G` drops below the tolerance.

use super::{LabeledDataset, Kernel, SolverStats, SvmModel};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
/// Multipliers at or below this are not support vectors.
const SV_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

pub fn train(data: &LabeledDataset, kernel: Kernel, box_c: Option<f64>) -> Result<SvmModel> {
    train_with(data, kernel, box_c, &SolverOptions::default())
}

pub fn train_with(
    data: &LabeledDataset,
    kernel: Kernel,
    box_c: Option<f64>,
    options: &SolverOptions,
) -> Result<SvmModel> {
    kernel.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !data.has_both_classes() {
        return Err(Error::SingleClass);
    }
    if let Some(c) = box_c {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidConfig(format!("box constraint must be positive, got {c}")));
        }
    }
    let c = box_c.unwrap_or(f64::INFINITY);
    let n = data.len();
    let x = data.points();
    let y: Vec<f64> = data.labels().iter().map(|&l| f64::from(l)).collect();

    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval_unchecked(&x[i], &x[j]);
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    let k = |i: usize, j: usize| gram[i * n + j];

    let mut alpha = vec![0.0; n];
    // Gradient of the minimization form 1/2 a'Qa - e'a.
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let residual = loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best_gain = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = k(i, i) + k(t, t) - 2.0 * k(i, t);
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let gain = -(b * b) / a;
                    if gain <= best_gain {
                        best_gain = gain;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let gap = gmax - gmin;
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if gap >= options.tolerance => (i, j),
            _ => break if gap.is_finite() { gap } else { 0.0 },
        };
        if iterations >= options.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                kkt_residual: gap,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    };

    // Bias from the margin condition y_i f(x_i) = 1 on free multipliers.
    let f_no_bias = |i: usize| -> f64 { (0..n).map(|j| alpha[j] * y[j] * k(j, i)).sum() };
    let is_free = |a: f64| a > SV_THRESHOLD && a < c - SV_THRESHOLD;
    let free: Vec<usize> = (0..n).filter(|&i| is_free(alpha[i])).collect();
    let bias = if !free.is_empty() {
        free.iter().map(|&i| y[i] - f_no_bias(i)).sum::<f64>() / free.len() as f64
    } else {
        // Every multiplier at a bound: take the middle of the feasible
        // interval for b implied by the KKT conditions.
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let target = y[i] - f_no_bias(i);
            let at_zero = alpha[i] <= SV_THRESHOLD;
            // alpha = 0 requires y f >= 1, alpha = C requires y f <= 1.
            if (y[i] > 0.0) == at_zero {
                lower = lower.max(target);
            } else {
                upper = upper.min(target);
            }
        }
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => 0.5 * (lower + upper),
            (true, false) => lower,
            (false, true) => upper,
            (false, false) => 0.0,
        }
    };

    let (support_vectors, coefficients) = (0..n)
        .filter(|&i| alpha[i] > SV_THRESHOLD)
        .map(|i| (x[i].clone(), alpha[i] * y[i]))
        .unzip();

    Ok(SvmModel {
        kernel,
        box_c,
        support_vectors,
        coefficients,
        bias,
        stats: SolverStats {
            iterations,
            kkt_residual: residual,
        },
    })
}

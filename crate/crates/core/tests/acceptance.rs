//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the binary fails if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use gearscan::config::{PipelineConfig, SynthSection};
use gearscan::features::{write_feature_csv, ClassLabel, FeatureVector};
use gearscan::optim::{best_scale_at, pso_maximize, GaConfig, OptimizerConfig, Parallelism, SwarmConfig};
use gearscan::pipeline;
use gearscan::rng::seeded;
use gearscan::svm::{train, Kernel, LabeledDataset, SvmModel};
use gearscan::wavelet::{daughter_wavelet, shape_fitness};
use rand::Rng;

const FRAME: usize = 1250;

/// Direct cosine between the daughter wavelet at `(a, b)` and the signal,
/// written out from the definition.
fn oracle_fitness(signal: &[f64], a: f64, b: f64) -> f64 {
    let lo = (b - 4.0 * a).ceil().max(0.0) as usize;
    let hi = ((b + 4.0 * a).floor() as usize).min(signal.len() - 1);
    let (mut dot, mut ww, mut ss) = (0.0, 0.0, 0.0);
    for (i, &s) in signal.iter().enumerate().take(hi + 1).skip(lo) {
        let t = (i as f64 - b) / a;
        let w = (-t * t / 2.0).exp() * (5.0 * t).cos() / a.sqrt();
        dot += w * s;
        ww += w * w;
        ss += s * s;
    }
    if ss == 0.0 {
        0.0
    } else {
        dot / (ww.sqrt() * ss.sqrt())
    }
}

fn oracle_argmax(signal: &[f64], b: f64) -> f64 {
    (0..=3100)
        .map(|k| 1.0 + 0.01 * k as f64)
        .map(|a| (a, oracle_fitness(signal, a, b)))
        .fold((1.0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
        .0
}

fn injected(scale: f64, center: usize) -> Vec<f64> {
    let d = daughter_wavelet(scale, center as f64, FRAME).unwrap();
    let mut s = vec![0.0; FRAME];
    s[d.support()].copy_from_slice(&d.values);
    s
}

fn criterion_1() -> String {
    let mut rng = seeded(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let len = rng.random_range(1..400);
        let signal: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = rng.random_range(1.0..32.0);
        let b = rng.random_range(0..len) as f64;
        let f = shape_fitness(&signal, a, b).unwrap().fitness;
        assert!((-1.0..=1.0).contains(&f), "fitness {f} out of range");
    }
    for &(a, b) in &[(1.0, 50.0), (3.3, 200.0), (12.0, 600.0), (32.0, 10.0)] {
        let d = daughter_wavelet(a, b, FRAME).unwrap();
        let place = |k: f64| {
            let mut s = vec![0.0; FRAME];
            for (x, v) in s[d.support()].iter_mut().zip(&d.values) {
                *x = k * v;
            }
            shape_fitness(&s, a, b).unwrap().fitness
        };
        for (k, want) in [(1.0, 1.0), (-1.0, -1.0), (0.1, 1.0), (3.7, 1.0), (100.0, 1.0)] {
            worst = worst.max((place(k) - want).abs());
        }
    }
    assert!(worst <= 1e-9, "identity error {worst:e}");
    format!("1000 windows in [-1, 1]; identity error {worst:.1e}")
}

fn criterion_2() -> String {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let cfg = SwarmConfig {
            rng_seed: seed,
            ..SwarmConfig::default()
        };
        let r = pso_maximize(|x| -(x - 5.0) * (x - 5.0), &cfg).unwrap();
        assert!(
            r.trace.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness),
            "seed {seed}: gb trace decreases"
        );
        worst = worst.max((r.best_position - 5.0).abs());
    }
    assert!(worst <= 1e-3, "worst |x - 5| = {worst:e}");
    format!("20 seeds, worst |x - 5| = {worst:.1e}")
}

fn criterion_3() -> String {
    let mut parts = Vec::new();
    for a_star in [3.0, 8.0, 20.0] {
        let center = 625;
        let signal = injected(a_star, center);
        let oracle = oracle_argmax(&signal, center as f64);
        let est = best_scale_at(&signal, center, &OptimizerConfig::Pso(SwarmConfig::default())).unwrap();
        assert!((oracle - a_star).abs() <= 0.05, "oracle {oracle} vs a* {a_star}");
        assert!(
            (est.scale - oracle).abs() <= 0.5,
            "pso {} vs oracle {oracle}",
            est.scale
        );
        parts.push(format!("a*={a_star}: oracle {oracle:.2}, pso {:.3}", est.scale));
    }
    parts.join("; ")
}

fn criterion_4() -> String {
    let translations = pipeline::evenly_spaced(FRAME, 20);
    let scales = [3.0, 8.0, 20.0];
    let run = || {
        let mut pso_time = 0.0;
        let mut ga_time = 0.0;
        let mut diffs = Vec::new();
        for (k, &b) in translations.iter().enumerate() {
            let signal = injected(scales[k % 3], b);
            let cmp = pipeline::compare_optimizers(
                &signal,
                &[b],
                &SwarmConfig::default(),
                &GaConfig::default(),
                k as u64,
            )
            .unwrap();
            pso_time += cmp.pso_time_s();
            ga_time += cmp.ga_time_s();
            diffs.push(cmp.mean_abs_scale_difference());
        }
        (pso_time, ga_time, diffs.iter().sum::<f64>() / diffs.len() as f64)
    };
    run();
    let (pso_time, ga_time, mean_diff) = run();
    assert!(mean_diff < 1.0, "mean |ga - pso| = {mean_diff}");
    assert!(ga_time > pso_time, "ga {ga_time:.4} s <= pso {pso_time:.4} s");
    format!(
        "mean |ga - pso| = {mean_diff:.2e}; ga {ga_time:.4} s vs pso {pso_time:.4} s (ratio {:.2})",
        ga_time / pso_time
    )
}

/// 160 frames at 15 generations, shared by criteria 5 and 7.
fn benchmark_features() -> Vec<FeatureVector> {
    let mut cfg = PipelineConfig::default();
    cfg.pso.max_generations = 15;
    let frames = pipeline::frames_from_config(&cfg).unwrap();
    assert_eq!(frames.len(), 160);
    pipeline::extract_all(&cfg, &frames, Parallelism::Threads(0), |_, _| {}).unwrap()
}

fn criterion_5(features: &[FeatureVector]) -> String {
    for f in features {
        assert_eq!(f.bin_counts.len(), 16);
        assert_eq!(f.total(), FRAME as u64, "frame {}", f.frame_id);
    }
    let class = |c: ClassLabel| -> Vec<Vec<f64>> {
        features
            .iter()
            .filter(|f| f.label == Some(c))
            .take(20)
            .map(|f| f.as_f64())
            .collect()
    };
    let (h, c) = (class(ClassLabel::Healthy), class(ClassLabel::Chipped));
    assert_eq!((h.len(), c.len()), (20, 20));
    let mean = |xs: &[Vec<f64>], k: usize| xs.iter().map(|x| x[k]).sum::<f64>() / xs.len() as f64;
    let var = |xs: &[Vec<f64>], k: usize| {
        let m = mean(xs, k);
        xs.iter().map(|x| (x[k] - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let mut best = (0, 0.0);
    for k in 0..16 {
        let pooled = ((var(&h, k) + var(&c, k)) / 2.0).sqrt();
        let ratio = (mean(&h, k) - mean(&c, k)).abs() / pooled;
        if ratio > best.1 {
            best = (k, ratio);
        }
    }
    assert!(best.1 > 3.0, "best separation {:.2} pooled sd", best.1);
    format!(
        "160 frames sum to {FRAME}; bin {} separates by {:.1} pooled sd",
        best.0, best.1
    )
}

/// Dual objective at `alpha` for the problem in `data`.
fn dual(data: &LabeledDataset, kernel: Kernel, alpha: &[f64]) -> f64 {
    let x = data.points();
    let y = data.labels();
    let mut quad = 0.0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            quad += alpha[i] * alpha[j] * f64::from(y[i] * y[j]) * kernel.eval(&x[i], &x[j]).unwrap();
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Maximum of the dual over a grid on the first n - 1 multipliers, the last
/// fixed by the equality constraint, then a shrinking pattern search.
fn brute_force_dual(data: &LabeledDataset, kernel: Kernel, c: f64) -> f64 {
    let n = data.len();
    let y = data.labels();
    let complete = |head: &[f64]| -> Option<Vec<f64>> {
        let s: f64 = head.iter().zip(y).map(|(a, &yi)| a * f64::from(yi)).sum();
        let last = -s * f64::from(y[n - 1]);
        (-1e-12..=c + 1e-12).contains(&last).then(|| {
            let mut a = head.to_vec();
            a.push(last.clamp(0.0, c));
            a
        })
    };
    let steps = 24usize;
    let h = c / steps as f64;
    let mut best = (f64::NEG_INFINITY, vec![0.0; n - 1]);
    let mut idx = vec![0usize; n - 1];
    loop {
        let head: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
        if let Some(a) = complete(&head) {
            let v = dual(data, kernel, &a);
            if v > best.0 {
                best = (v, head);
            }
        }
        let mut d = 0;
        while d < idx.len() {
            idx[d] += 1;
            if idx[d] <= steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == idx.len() {
            break;
        }
    }
    let mut step = h;
    while step > 1e-7 {
        let mut moved = false;
        for d in 0..n - 1 {
            for dir in [-1.0, 1.0] {
                let mut head = best.1.clone();
                head[d] = (head[d] + dir * step).clamp(0.0, c);
                if let Some(a) = complete(&head) {
                    let v = dual(data, kernel, &a);
                    if v > best.0 {
                        best = (v, head);
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    best.0
}

fn criterion_6() -> String {
    let problems: Vec<(Vec<Vec<f64>>, Vec<i8>, Kernel, f64)> = vec![
        (vec![vec![0.0], vec![2.0]], vec![-1, 1], Kernel::Linear, 1.0),
        (vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![2.0, 2.0]], vec![-1, 1, 1], Kernel::Linear, 2.0),
        (
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![-1, -1, 1, 1],
            Kernel::Rbf { sigma: 0.5 },
            10.0,
        ),
        (
            vec![vec![0.0], vec![0.4], vec![1.0], vec![0.6], vec![2.0]],
            vec![-1, 1, 1, -1, 1],
            Kernel::Linear,
            1.0,
        ),
        (
            vec![vec![0.0, 1.0], vec![1.0, 2.0], vec![2.0, 0.0], vec![0.5, 0.5], vec![3.0, 1.0]],
            vec![1, -1, -1, 1, -1],
            Kernel::Rbf { sigma: 1.0 },
            3.0,
        ),
    ];
    let mut worst = 0.0f64;
    for (points, labels, kernel, c) in problems {
        let data = LabeledDataset::new(points, labels).unwrap();
        let model = train(&data, kernel, Some(c)).unwrap();
        let oracle = brute_force_dual(&data, kernel, c);
        let gap = (model.dual_objective() - oracle).abs();
        assert!(gap <= 1e-2, "dual {} vs oracle {oracle}", model.dual_objective());
        worst = worst.max(gap);
    }
    let two = LabeledDataset::new(vec![vec![0.0], vec![2.0]], vec![-1, 1]).unwrap();
    let m: SvmModel = train(&two, Kernel::Linear, None).unwrap();
    let at = |x: f64| m.decision_value(&[x]).unwrap();
    let margin_err = (at(1.0).abs()).max((at(0.0) + 1.0).abs()).max((at(2.0) - 1.0).abs());
    assert!(margin_err <= 1e-3, "two-point error {margin_err:e}");
    format!("5 problems, worst dual gap {worst:.1e}; two-point error {margin_err:.1e}")
}

fn criterion_7(features: &[FeatureVector]) -> String {
    let run = |kernel: &str, sigma: f64| {
        let mut cfg = PipelineConfig::default();
        cfg.svm.kernel = match kernel {
            "linear" => gearscan::config::KernelKind::Linear,
            _ => gearscan::config::KernelKind::Rbf,
        };
        cfg.svm.sigma = sigma;
        let r = pipeline::train_classifier(&cfg, features).unwrap();
        (r.train.accuracy, r.test.unwrap().accuracy)
    };
    let linear = run("linear", 1.5);
    let rbf = [0.5, 1.0, 1.5].map(|s| run("rbf", s));
    let summary = format!(
        "linear {:.0}/{:.0}; rbf 0.5 {:.0}/{:.0}, 1.0 {:.0}/{:.0}, 1.5 {:.0}/{:.0} (train/test %)",
        100.0 * linear.0,
        100.0 * linear.1,
        100.0 * rbf[0].0,
        100.0 * rbf[0].1,
        100.0 * rbf[1].0,
        100.0 * rbf[1].1,
        100.0 * rbf[2].0,
        100.0 * rbf[2].1
    );
    assert_eq!(linear.0, 1.0, "{summary}");
    assert_eq!(rbf[2].0, 1.0, "{summary}");
    assert!(rbf[2].1 >= 0.95, "{summary}");
    assert!(rbf[2].1 >= rbf[0].1, "{summary}");
    summary
}

fn criterion_8() -> String {
    let mut cfg = PipelineConfig {
        synth: Some(SynthSection {
            healthy_frames: 4,
            chipped_frames: 4,
            ..SynthSection::default()
        }),
        ..PipelineConfig::default()
    };
    cfg.pso.max_generations = 10;
    cfg.svm.train_count = 6;
    cfg.svm.test_count = 2;
    let run = |threads: Parallelism| {
        let dir = tempfile::tempdir().unwrap();
        let out = pipeline::synthesize_to_dir(&cfg, dir.path()).unwrap();
        let frames = pipeline::frames_from_manifest(&out.manifest).unwrap();
        let features = pipeline::extract_all(&cfg, &frames, threads, |_, _| {}).unwrap();
        let mut csv = Vec::new();
        write_feature_csv(&mut csv, &features).unwrap();
        let report = pipeline::train_classifier(&cfg, &features).unwrap();
        let decisions: Vec<f64> = features
            .iter()
            .map(|f| report.classifier.decision_value(&f.as_f64()).unwrap())
            .collect();
        (csv, decisions)
    };
    let (csv_a, dec_a) = run(Parallelism::Serial);
    let (csv_b, dec_b) = run(Parallelism::Threads(2));
    assert_eq!(csv_a, csv_b, "feature CSVs differ");
    let worst = dec_a
        .iter()
        .zip(&dec_b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "decision values differ by {worst:e}");
    format!("{} CSV bytes identical; decision values differ by {worst:.1e}", csv_a.len())
}

fn check(n: usize, name: &str, f: impl FnOnce() -> String) -> bool {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f));
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("criterion {n} {name}: PASS ({secs:.1} s) {detail}");
            true
        }
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            println!("criterion {n} {name}: FAIL ({secs:.1} s) {msg}");
            false
        }
    }
}

fn main() {
    panic::set_hook(Box::new(|_| {}));
    let mut ok = true;
    ok &= check(1, "fitness bounds and identities", criterion_1);
    ok &= check(2, "pso on quadratic", criterion_2);
    ok &= check(3, "scale recovery vs grid oracle", criterion_3);
    ok &= check(4, "ga baseline parity", criterion_4);
    let features = benchmark_features();
    ok &= check(5, "feature conservation and separation", || criterion_5(&features));
    ok &= check(6, "svm dual vs brute force", criterion_6);
    ok &= check(7, "classifier accuracy", || criterion_7(&features));
    ok &= check(8, "determinism", criterion_8);
    if !ok {
        std::process::exit(1);
    }
}

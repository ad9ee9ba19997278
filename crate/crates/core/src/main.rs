use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use gearscan::config::{KernelKind, PipelineConfig};
use gearscan::features::{read_feature_csv, write_feature_csv, ClassLabel, FeatureVector};
use gearscan::optim::Parallelism;
use gearscan::pipeline::{self, LabeledFrame};
use gearscan::svm::{Evaluation, FaultClassifier};

/// Gearbox fault detection from Morlet scale distributions.
#[derive(Parser)]
#[command(name = "gearscan", version)]
struct Cli {
    /// TOML pipeline configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic healthy and chipped records plus a manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute scale-distribution features for every frame.
    Extract {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the per-sample scan; 0 uses every core.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Train the classifier on a seeded split of a feature file.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        kernel: Option<KernelArg>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Box constraint; `inf` trains a hard margin.
        #[arg(long)]
        box_c: Option<f64>,
    },
    /// Label every frame of a feature file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict and report accuracy against the file's labels.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time PSO against GA at evenly spaced translations of one frame.
    CompareOptimizers {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        translations: Option<usize>,
        /// Frame to scan, by position in the source.
        #[arg(long, default_value_t = 0)]
        frame: usize,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Manifest written by `synth`.
    #[arg(long, conflicts_with = "signal")]
    manifest: Option<PathBuf>,
    /// Plain-text signal files, one sample per line.
    #[arg(long, num_args = 1..)]
    signal: Vec<PathBuf>,
    /// Label for frames from --signal files.
    #[arg(long, requires = "signal")]
    label: Option<ClassLabel>,
    /// Sample rate of --signal files.
    #[arg(long, requires = "signal")]
    sample_rate: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

fn load_config(cli: &Cli) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn frames(cfg: &PipelineConfig, source: &SourceArgs) -> anyhow::Result<Vec<LabeledFrame>> {
    if let Some(manifest) = &source.manifest {
        return Ok(pipeline::frames_from_manifest(manifest)?);
    }
    if source.signal.is_empty() {
        return Ok(pipeline::frames_from_config(cfg)?);
    }
    let rate = source
        .sample_rate
        .or(cfg.input.as_ref().map(|i| i.sample_rate_hz))
        .unwrap_or(cfg.synth_section().sample_rate_hz);
    let mut out = Vec::new();
    for path in &source.signal {
        out.extend(pipeline::frames_from_signal(path, rate, cfg.frame_length, source.label)?);
    }
    Ok(out)
}

fn read_features(path: &Path) -> anyhow::Result<Vec<FeatureVector>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_feature_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn print_evaluation(name: &str, e: &Evaluation) {
    let [[hh, hc], [ch, cc]] = e.confusion;
    println!(
        "{name}: accuracy {:.2}% ({}/{})",
        100.0 * e.accuracy,
        e.correct(),
        e.total
    );
    println!("  actual healthy -> healthy {hh}, chipped {hc}");
    println!("  actual chipped -> healthy {ch}, chipped {cc}");
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Synth { out } => {
            let result = pipeline::synthesize_to_dir(&cfg, &out)?;
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote {} segments to {}",
                result.segments.len(),
                result.manifest.display()
            );
        }
        Command::Extract {
            source,
            out,
            threads,
        } => {
            let frames = frames(&cfg, &source)?;
            if frames.is_empty() {
                eprintln!("warning: no frames to extract");
            }
            let parallelism = match threads.unwrap_or(cfg.threads) {
                1 => Parallelism::Serial,
                n => Parallelism::Threads(n),
            };
            let total = frames.len();
            let mut done = 0;
            let features = pipeline::extract_all(&cfg, &frames, parallelism, |fv, secs| {
                done += 1;
                eprintln!("[{done}/{total}] {} {secs:.3} s", fv.frame_id);
            })?;
            let mut w = pipeline::create_output(&out)?;
            write_feature_csv(&mut w, &features)?;
            w.flush()?;
        }
        Command::Train {
            features,
            out,
            kernel,
            sigma,
            box_c,
        } => {
            if let Some(k) = kernel {
                cfg.svm.kernel = match k {
                    KernelArg::Linear => KernelKind::Linear,
                    KernelArg::Rbf => KernelKind::Rbf,
                };
            }
            if let Some(s) = sigma {
                cfg.svm.sigma = s;
            }
            if let Some(c) = box_c {
                cfg.svm.box_c = c;
            }
            cfg.validate()?;
            let rows = read_features(&features)?;
            let report = pipeline::train_classifier(&cfg, &rows)?;
            report.classifier.save(&out)?;
            print_evaluation("train", &report.train);
            if let Some(test) = &report.test {
                print_evaluation("test", test);
            }
            let stats = report.classifier.model.stats;
            println!(
                "support vectors {}, solver iterations {}, kkt residual {:.2e}",
                report.classifier.model.support_vectors.len(),
                stats.iterations,
                stats.kkt_residual
            );
        }
        Command::Predict {
            model,
            features,
            out,
        } => {
            let clf = FaultClassifier::load(&model)?;
            let predictions = pipeline::predict_all(&clf, &read_features(&features)?)?;
            let mut w = pipeline::create_output(&out)?;
            pipeline::write_predictions_csv(&mut w, &predictions)?;
            w.flush()?;
        }
        Command::Evaluate {
            model,
            features,
            out,
        } => {
            let clf = FaultClassifier::load(&model)?;
            let predictions = pipeline::predict_all(&clf, &read_features(&features)?)?;
            if let Some(out) = out {
                let mut w = pipeline::create_output(&out)?;
                pipeline::write_predictions_csv(&mut w, &predictions)?;
                w.flush()?;
            }
            match pipeline::score_predictions(&predictions) {
                Some(e) => print_evaluation("evaluation", &e),
                None => bail!("no labelled frames to evaluate against"),
            }
        }
        Command::CompareOptimizers {
            source,
            out,
            translations,
            frame,
        } => {
            let frames = frames(&cfg, &source)?;
            let Some(f) = frames.get(frame) else {
                bail!("frame {frame} requested but the source has {} frames", frames.len());
            };
            let n = translations.unwrap_or(cfg.compare.translations);
            let points = pipeline::evenly_spaced(f.frame.len(), n);
            let comparison = pipeline::compare_optimizers(
                &f.frame.samples,
                &points,
                &cfg.swarm_config(),
                &cfg.ga_config(),
                cfg.stream_seed(gearscan::config::streams::COMPARE),
            )?;
            let mut w = pipeline::create_output(&out)?;
            comparison.write_csv(&mut w)?;
            w.flush()?;
            println!("frame {}", f.id);
            println!("{}", comparison.summary());
        }
    }
    io::stdout().flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

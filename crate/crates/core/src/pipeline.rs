//! End-to-end steps behind the command-line tool: synthesize records,
//! extract scale-distribution features, train and apply the classifier,
//! and compare the two optimizers.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::config::{streams, PipelineConfig, SignalSource};
use crate::error::{Error, Result};
use crate::features::{extract_features, ClassLabel, FeatureVector};
use crate::optim::{best_scale_at, translation_seed, GaConfig, OptimizerConfig, Parallelism, ScaleEstimate, SwarmConfig};
use crate::rng::{mix_seed, seeded};
use crate::signal::{frame_signal, load_signal, synthesize_gearbox, write_signal, Frame, Signal};
use crate::svm::{Evaluation, FaultClassifier, LabeledDataset};

pub const MANIFEST_FILE: &str = "manifest.csv";

/// One frame-sized piece of a signal file, as listed in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub segment_id: String,
    /// Relative to the manifest's directory.
    pub file: PathBuf,
    pub class: Option<ClassLabel>,
    pub seed: u64,
    pub start_index: usize,
    pub length: usize,
    pub sample_rate_hz: f64,
}

pub fn write_manifest(path: impl AsRef<Path>, segments: &[Segment]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    // An empty manifest still carries its header.
    if segments.is_empty() {
        w.write_record([
            "segment_id",
            "file",
            "class",
            "seed",
            "start_index",
            "length",
            "sample_rate_hz",
        ])
        .map_err(|e| Error::Format(format!("manifest: {e}")))?;
    }
    for s in segments {
        w.serialize(s)
            .map_err(|e| Error::Format(format!("manifest: {e}")))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<Segment>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .enumerate()
        .map(|(row, r)| {
            r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: row + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// A frame ready for feature extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFrame {
    pub id: String,
    pub label: Option<ClassLabel>,
    pub frame: Frame,
}

/// One synthesized record per class.
#[derive(Debug, Clone)]
pub struct ClassRecord {
    pub class: ClassLabel,
    pub seed: u64,
    pub frames: usize,
    pub signal: Signal,
}

/// Render the healthy and chipped records described by `[synth]`. Classes
/// with zero frames are left out.
pub fn synthesize_records(config: &PipelineConfig) -> Result<Vec<ClassRecord>> {
    let synth = config.synth_section();
    let mut out = Vec::new();
    for (class, stream) in [
        (ClassLabel::Healthy, streams::HEALTHY_SIGNAL),
        (ClassLabel::Chipped, streams::CHIPPED_SIGNAL),
    ] {
        let frames = synth.frames(class);
        if frames == 0 {
            continue;
        }
        let seed = config.stream_seed(stream);
        let signal = synthesize_gearbox(&synth.synth_config(class, frames, config.frame_length, seed))?;
        out.push(ClassRecord {
            class,
            seed,
            frames,
            signal,
        });
    }
    Ok(out)
}

fn segment_id(class: ClassLabel, k: usize) -> String {
    format!("{class}-{k:04}")
}

/// Segments covering `record` frame by frame.
pub fn record_segments(record: &ClassRecord, file: &Path, frame_length: usize) -> Vec<Segment> {
    (0..record.frames)
        .map(|k| Segment {
            segment_id: segment_id(record.class, k),
            file: file.to_path_buf(),
            class: Some(record.class),
            seed: record.seed,
            start_index: k * frame_length,
            length: frame_length,
            sample_rate_hz: record.signal.sample_rate_hz(),
        })
        .collect()
}

/// Frames of `records`, labelled by class, in record order.
pub fn record_frames(records: &[ClassRecord], frame_length: usize) -> Result<Vec<LabeledFrame>> {
    let mut out = Vec::new();
    for record in records {
        for (k, frame) in frame_signal(&record.signal, frame_length)?.into_iter().enumerate() {
            out.push(LabeledFrame {
                id: segment_id(record.class, k),
                label: Some(record.class),
                frame,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub manifest: PathBuf,
    pub files: Vec<PathBuf>,
    pub segments: Vec<Segment>,
    pub warnings: Vec<String>,
}

/// Write `healthy.txt`, `chipped.txt` and `manifest.csv` into `out_dir`.
pub fn synthesize_to_dir(config: &PipelineConfig, out_dir: impl AsRef<Path>) -> Result<SynthOutput> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let records = synthesize_records(config)?;
    let mut warnings = Vec::new();
    if records.is_empty() {
        warnings.push("no frames requested; the manifest is empty".to_string());
    }
    let mut files = Vec::new();
    let mut segments = Vec::new();
    for record in &records {
        let name = PathBuf::from(format!("{}.txt", record.class));
        let path = out_dir.join(&name);
        write_signal(&path, record.signal.samples())?;
        files.push(path);
        segments.extend(record_segments(record, &name, config.frame_length));
    }
    let manifest = out_dir.join(MANIFEST_FILE);
    write_manifest(&manifest, &segments)?;
    Ok(SynthOutput {
        manifest,
        files,
        segments,
        warnings,
    })
}

/// Load the frames a manifest points at.
pub fn frames_from_manifest(path: impl AsRef<Path>) -> Result<Vec<LabeledFrame>> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut cache: HashMap<PathBuf, Signal> = HashMap::new();
    let mut out = Vec::new();
    for seg in read_manifest(path)? {
        let file = dir.join(&seg.file);
        if !cache.contains_key(&file) {
            let signal = load_signal(&file, seg.sample_rate_hz)?;
            cache.insert(file.clone(), signal);
        }
        let signal = &cache[&file];
        let end = seg.start_index + seg.length;
        if seg.length == 0 || end > signal.len() {
            return Err(Error::Format(format!(
                "segment {} spans samples {}..{} of {} ({} samples)",
                seg.segment_id,
                seg.start_index,
                end,
                file.display(),
                signal.len()
            )));
        }
        out.push(LabeledFrame {
            id: seg.segment_id,
            label: seg.class,
            frame: Frame {
                start_index: seg.start_index,
                samples: signal.samples()[seg.start_index..end].to_vec(),
            },
        });
    }
    Ok(out)
}

/// Split a signal file into consecutive frames named `<stem>-<k>`.
pub fn frames_from_signal(
    path: impl AsRef<Path>,
    sample_rate_hz: f64,
    frame_length: usize,
    label: Option<ClassLabel>,
) -> Result<Vec<LabeledFrame>> {
    let path = path.as_ref();
    let signal = load_signal(path, sample_rate_hz)?;
    let stem = path
        .file_stem()
        .map_or_else(|| "signal".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(frame_signal(&signal, frame_length)?
        .into_iter()
        .enumerate()
        .map(|(k, frame)| LabeledFrame {
            id: format!("{stem}-{k:04}"),
            label,
            frame,
        })
        .collect())
}

/// Frames of the configured source: the `[input]` file, or freshly
/// synthesized records.
pub fn frames_from_config(config: &PipelineConfig) -> Result<Vec<LabeledFrame>> {
    match config.source() {
        SignalSource::Input(input) => frames_from_signal(
            &input.path,
            input.sample_rate_hz,
            config.frame_length,
            input.label,
        ),
        SignalSource::Synth(_) => record_frames(&synthesize_records(config)?, config.frame_length),
    }
}

/// Histogram features for every frame.
///
/// Frame `k` of the list runs its optimizers under base seed
/// `mix_seed(optimizer seed, k)`. `on_frame` sees each result with the
/// seconds it took.
pub fn extract_all(
    config: &PipelineConfig,
    frames: &[LabeledFrame],
    parallelism: Parallelism,
    mut on_frame: impl FnMut(&FeatureVector, f64),
) -> Result<Vec<FeatureVector>> {
    let optimizer = config.optimizer_config();
    let bins = config.bins();
    let base = optimizer.seed();
    let mut out = Vec::with_capacity(frames.len());
    for (k, f) in frames.iter().enumerate() {
        let start = Instant::now();
        let opt = optimizer.with_seed(mix_seed(base, k as u64));
        let fv = extract_features(&f.frame, &opt, &bins, f.id.clone(), f.label, parallelism)?;
        on_frame(&fv, start.elapsed().as_secs_f64());
        out.push(fv);
    }
    Ok(out)
}

fn labeled_dataset(rows: &[&FeatureVector]) -> Result<LabeledDataset> {
    let mut points = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for r in rows {
        let label = r.label.ok_or_else(|| {
            Error::Format(format!("frame {} has no label", r.frame_id))
        })?;
        points.push(r.as_f64());
        labels.push(label.target());
    }
    LabeledDataset::new(points, labels)
}

/// Share `total` between two pools in proportion to their sizes (largest
/// remainder), never exceeding a pool. Requires `total <= sum(avail)`.
fn allocate(total: usize, avail: [usize; 2]) -> [usize; 2] {
    let n = avail[0] + avail[1];
    if n == 0 {
        return [0, 0];
    }
    let exact = avail.map(|a| (total * a) as f64 / n as f64);
    let mut q = exact.map(|e| e.floor() as usize);
    if q[0] + q[1] < total {
        q[usize::from(exact[1].fract() > exact[0].fract())] += 1;
    }
    for c in 0..2 {
        let over = q[c].saturating_sub(avail[c]);
        q[c] -= over;
        q[1 - c] += over;
    }
    q
}

/// Row indices of a class-stratified train/test split.
pub fn stratified_split(
    features: &[FeatureVector],
    train_count: usize,
    test_count: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, f) in features.iter().enumerate() {
        let label = f
            .label
            .ok_or_else(|| Error::Format(format!("frame {} has no label", f.frame_id)))?;
        by_class[usize::from(label.target() > 0)].push(i);
    }
    let mut rng = seeded(seed);
    by_class.iter_mut().for_each(|c| c.shuffle(&mut rng));
    let train_q = allocate(train_count, [by_class[0].len(), by_class[1].len()]);
    let test_q = allocate(
        test_count,
        [by_class[0].len() - train_q[0], by_class[1].len() - train_q[1]],
    );
    let mut train = Vec::with_capacity(train_count);
    let mut test = Vec::with_capacity(test_count);
    for (c, rows) in by_class.iter().enumerate() {
        train.extend_from_slice(&rows[..train_q[c]]);
        test.extend_from_slice(&rows[train_q[c]..train_q[c] + test_q[c]]);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((train, test))
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub classifier: FaultClassifier,
    pub train: Evaluation,
    pub test: Option<Evaluation>,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

/// Split `features` under the split seed, train on `train_count` rows and
/// evaluate on `test_count` others.
///
/// The split is stratified: each class contributes to both parts in
/// proportion to its share of `features` (largest remainder), and rows are
/// drawn from a seeded shuffle of each class.
pub fn train_classifier(config: &PipelineConfig, features: &[FeatureVector]) -> Result<TrainReport> {
    let svm = &config.svm;
    if svm.train_count + svm.test_count > features.len() {
        return Err(Error::SplitTooLarge {
            train: svm.train_count,
            test: svm.test_count,
            available: features.len(),
        });
    }
    if svm.train_count == 0 {
        return Err(Error::EmptyDataset);
    }
    let (train_idx, test_idx) = stratified_split(
        features,
        svm.train_count,
        svm.test_count,
        config.stream_seed(streams::SPLIT),
    )?;
    let train_rows: Vec<&FeatureVector> = train_idx.iter().map(|&i| &features[i]).collect();
    let test_rows: Vec<&FeatureVector> = test_idx.iter().map(|&i| &features[i]).collect();

    let train_data = labeled_dataset(&train_rows)?;
    let classifier = FaultClassifier::fit(
        &train_data,
        svm.kernel(),
        svm.box_constraint(),
        svm.standardize,
    )?;
    let train = classifier.evaluate(&train_data)?;
    let test = if test_rows.is_empty() {
        None
    } else {
        Some(classifier.evaluate(&labeled_dataset(&test_rows)?)?)
    };
    let ids = |rows: &[&FeatureVector]| rows.iter().map(|r| r.frame_id.clone()).collect();
    Ok(TrainReport {
        classifier,
        train,
        test,
        train_ids: ids(&train_rows),
        test_ids: ids(&test_rows),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub frame_id: String,
    pub actual: Option<ClassLabel>,
    pub predicted: ClassLabel,
    pub decision_value: f64,
}

pub fn predict_all(classifier: &FaultClassifier, features: &[FeatureVector]) -> Result<Vec<Prediction>> {
    features
        .iter()
        .map(|f| {
            let d = classifier.decision_value(&f.as_f64())?;
            Ok(Prediction {
                frame_id: f.frame_id.clone(),
                actual: f.label,
                predicted: ClassLabel::from_target(crate::svm::sign(d)),
                decision_value: d,
            })
        })
        .collect()
}

/// Accuracy over the predictions whose frames carry a label; `None` when
/// none do.
pub fn score_predictions(predictions: &[Prediction]) -> Option<Evaluation> {
    let pairs: Vec<(i8, i8)> = predictions
        .iter()
        .filter_map(|p| p.actual.map(|a| (a.target(), p.predicted.target())))
        .collect();
    crate::svm::tally(pairs).ok()
}

pub fn write_predictions_csv<W: Write>(out: W, predictions: &[Prediction]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Format(format!("predictions: {e}"));
    w.write_record(["frame_id", "predicted_label", "decision_value"])
        .map_err(err)?;
    for p in predictions {
        w.write_record([
            p.frame_id.as_str(),
            p.predicted.as_str(),
            &p.decision_value.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// `n` translations spread evenly over `0..len`, at the centres of `n`
/// equal cells.
pub fn evenly_spaced(len: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|k| (((2 * k + 1) * len) / (2 * n)).min(len.saturating_sub(1)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub translation: usize,
    pub pso: ScaleEstimate,
    pub pso_time_s: f64,
    pub ga: ScaleEstimate,
    pub ga_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn pso_time_s(&self) -> f64 {
        self.rows.iter().map(|r| r.pso_time_s).sum()
    }

    pub fn ga_time_s(&self) -> f64 {
        self.rows.iter().map(|r| r.ga_time_s).sum()
    }

    /// GA wall time over PSO wall time.
    pub fn time_ratio(&self) -> f64 {
        self.ga_time_s() / self.pso_time_s()
    }

    pub fn mean_abs_scale_difference(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows
            .iter()
            .map(|r| (r.pso.scale - r.ga.scale).abs())
            .sum::<f64>()
            / self.rows.len() as f64
    }

    pub fn summary(&self) -> String {
        format!(
            "translations {}\npso total {:.4} s\nga total {:.4} s\nga/pso time ratio {:.3}\nmean |pso scale - ga scale| {:.4}",
            self.rows.len(),
            self.pso_time_s(),
            self.ga_time_s(),
            self.time_ratio(),
            self.mean_abs_scale_difference()
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Format(format!("comparison: {e}"));
        w.write_record([
            "translation",
            "pso_scale",
            "pso_fitness",
            "pso_time_s",
            "ga_scale",
            "ga_fitness",
            "ga_time_s",
        ])
        .map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.translation.to_string(),
                r.pso.scale.to_string(),
                r.pso.fitness.to_string(),
                r.pso_time_s.to_string(),
                r.ga.scale.to_string(),
                r.ga.fitness.to_string(),
                r.ga_time_s.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// Run both optimizers, one after the other on one thread, at each
/// translation. Both runs at translation `b` use seed
/// `translation_seed(seed, b)`.
pub fn compare_optimizers(
    samples: &[f64],
    translations: &[usize],
    swarm: &SwarmConfig,
    ga: &GaConfig,
    seed: u64,
) -> Result<Comparison> {
    let mut rows = Vec::with_capacity(translations.len());
    for &b in translations {
        let s = translation_seed(seed, b);
        let pso_cfg = OptimizerConfig::Pso(SwarmConfig {
            rng_seed: s,
            ..swarm.clone()
        });
        let ga_cfg = OptimizerConfig::Ga(GaConfig {
            rng_seed: s,
            ..ga.clone()
        });
        let t = Instant::now();
        let pso = best_scale_at(samples, b, &pso_cfg)?;
        let pso_time_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let ga = best_scale_at(samples, b, &ga_cfg)?;
        let ga_time_s = t.elapsed().as_secs_f64();
        rows.push(ComparisonRow {
            translation: b,
            pso,
            pso_time_s,
            ga,
            ga_time_s,
        });
    }
    Ok(Comparison { rows })
}

/// Create `path` for buffered writing, with its parent directories.
pub fn create_output(path: impl AsRef<Path>) -> Result<BufWriter<File>> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SynthSection;

    fn small_config() -> PipelineConfig {
        PipelineConfig {
            frame_length: 100,
            synth: Some(SynthSection {
                healthy_frames: 2,
                chipped_frames: 3,
                ..SynthSection::default()
            }),
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn synth_dir_and_manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = synthesize_to_dir(&small_config(), dir.path()).unwrap();
        assert_eq!(out.segments.len(), 5);
        assert!(out.warnings.is_empty());
        assert_eq!(read_manifest(&out.manifest).unwrap(), out.segments);
        let frames = frames_from_manifest(&out.manifest).unwrap();
        assert_eq!(frames.len(), 5);
        assert_eq!(frames[2].id, "chipped-0000");
        assert_eq!(frames[2].label, Some(ClassLabel::Chipped));
        assert!(frames.iter().all(|f| f.frame.len() == 100));
        let direct = frames_from_config(&small_config()).unwrap();
        assert_eq!(direct, frames);
    }

    #[test]
    fn zero_frames_gives_empty_manifest() {
        let cfg = PipelineConfig {
            synth: Some(SynthSection {
                healthy_frames: 0,
                chipped_frames: 0,
                ..SynthSection::default()
            }),
            ..PipelineConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let out = synthesize_to_dir(&cfg, dir.path()).unwrap();
        assert!(out.segments.is_empty());
        assert_eq!(out.warnings.len(), 1);
        assert!(frames_from_manifest(&out.manifest).unwrap().is_empty());
    }

    #[test]
    fn split_larger_than_data() {
        let rows: Vec<FeatureVector> = (0..5)
            .map(|i| FeatureVector {
                frame_id: i.to_string(),
                label: Some(ClassLabel::from_target(if i % 2 == 0 { 1 } else { -1 })),
                bin_counts: vec![i; 4],
            })
            .collect();
        let cfg = PipelineConfig::default();
        assert!(matches!(
            train_classifier(&cfg, &rows),
            Err(Error::SplitTooLarge { available: 5, .. })
        ));
    }

    #[test]
    fn stratified_split_sizes_are_exact() {
        let rows = |pos: usize, neg: usize| -> Vec<FeatureVector> {
            (0..pos + neg)
                .map(|i| FeatureVector {
                    frame_id: i.to_string(),
                    label: Some(ClassLabel::from_target(if i < pos { 1 } else { -1 })),
                    bin_counts: vec![1],
                })
                .collect()
        };
        for (pos, neg) in [(3, 3), (80, 80), (5, 1), (0, 4), (7, 2)] {
            let data = rows(pos, neg);
            let n = pos + neg;
            for train in 0..=n {
                for test in 0..=n - train {
                    let (tr, te) = stratified_split(&data, train, test, 9).unwrap();
                    assert_eq!((tr.len(), te.len()), (train, test));
                    let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
                    all.sort_unstable();
                    all.dedup();
                    assert_eq!(all.len(), train + test);
                }
            }
        }
        let (tr, te) = stratified_split(&rows(80, 80), 60, 100, 1).unwrap();
        let pos = |ix: &[usize]| ix.iter().filter(|&&i| i < 80).count();
        assert_eq!((pos(&tr), pos(&te)), (30, 50));
    }

    #[test]
    fn evenly_spaced_translations() {
        assert_eq!(evenly_spaced(100, 4), vec![12, 37, 62, 87]);
        assert_eq!(evenly_spaced(1250, 20).len(), 20);
        assert_eq!(evenly_spaced(3, 5), vec![0, 0, 1, 2, 2]);
    }

    #[test]
    fn predictions_csv_empty_and_filled() {
        let mut buf = Vec::new();
        write_predictions_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "frame_id,predicted_label,decision_value\n");
    }
}

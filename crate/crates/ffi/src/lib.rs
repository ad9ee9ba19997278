//! C ABI over the `gearscan` library.
//!
//! Every fallible function returns a [`GsStatus`]; on failure a message is
//! available from [`gs_last_error_message`] on the same thread. Objects are
//! opaque handles created by `*_load`/`*_synthesize` functions and released
//! with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use gearscan::features::{scale_distribution, BinSpec};
use gearscan::optim::{best_scale_at, scan_frame, GaConfig, OptimizerConfig, Parallelism, SwarmConfig};
use gearscan::signal::{load_signal, synthesize_gearbox, Signal, SynthConfig};
use gearscan::svm::FaultClassifier;
use gearscan::wavelet::{morlet, shape_fitness};
use gearscan::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Numeric = 5,
    Training = 6,
    Panic = 7,
}

impl From<&Error> for GsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => GsStatus::Io,
            Error::Parse { .. } | Error::Format(_) => GsStatus::Parse,
            Error::NonFiniteFitness { .. } => GsStatus::Numeric,
            Error::SingleClass | Error::EmptyDataset | Error::NotConverged { .. } => GsStatus::Training,
            _ => GsStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), (GsStatus, String)>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GsStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            GsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (GsStatus, String) {
    (GsStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (GsStatus, String) {
    (GsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> (GsStatus, String) {
    (GsStatus::InvalidArgument, message.into())
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (GsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (GsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (GsStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (GsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn gs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Real Morlet mother wavelet `exp(-t^2/2) cos(5t)`.
#[no_mangle]
pub extern "C" fn gs_morlet(t: f64) -> f64 {
    morlet(t)
}

/// Cosine similarity between the daughter wavelet at `(scale, translation)`
/// and the signal under its support.
///
/// # Safety
/// `signal` must point to `len` readable doubles; the out pointers must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gs_shape_fitness(
    signal: *const f64,
    len: usize,
    scale: f64,
    translation: f64,
    out_fitness: *mut f64,
    out_degenerate: *mut bool,
) -> GsStatus {
    guard(|| {
        let s = slice_arg(signal, len, "signal")?;
        let fitness = out_arg(out_fitness, "out_fitness")?;
        let m = shape_fitness(s, scale, translation).map_err(lib)?;
        *fitness = m.fitness;
        if let Some(d) = out_degenerate.as_mut() {
            *d = m.degenerate;
        }
        Ok(())
    })
}

/// Particle swarm settings. `v_max <= 0` or infinite means unbounded.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GsSwarmConfig {
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub population: u32,
    pub max_generations: u32,
    pub stall_time_limit_s: f64,
    pub time_limit_s: f64,
    pub rng_seed: u64,
}

impl From<&GsSwarmConfig> for SwarmConfig {
    fn from(c: &GsSwarmConfig) -> Self {
        SwarmConfig {
            inertia: c.inertia,
            c1: c.c1,
            c2: c.c2,
            v_max: (c.v_max > 0.0 && c.v_max.is_finite()).then_some(c.v_max),
            lower_bound: c.lower_bound,
            upper_bound: c.upper_bound,
            population: c.population as usize,
            max_generations: c.max_generations as usize,
            stall_time_limit_s: c.stall_time_limit_s,
            time_limit_s: c.time_limit_s,
            rng_seed: c.rng_seed,
        }
    }
}

#[no_mangle]
pub extern "C" fn gs_swarm_config_default() -> GsSwarmConfig {
    let d = SwarmConfig::default();
    GsSwarmConfig {
        inertia: d.inertia,
        c1: d.c1,
        c2: d.c2,
        v_max: 0.0,
        lower_bound: d.lower_bound,
        upper_bound: d.upper_bound,
        population: d.population as u32,
        max_generations: d.max_generations as u32,
        stall_time_limit_s: d.stall_time_limit_s,
        time_limit_s: d.time_limit_s,
        rng_seed: d.rng_seed,
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GsGaConfig {
    pub population: u32,
    pub elite_count: u32,
    pub mutation_probability: f64,
    pub crossover_fraction: f64,
    pub max_generations: u32,
    pub fitness_tolerance: f64,
    pub stall_generations: u32,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub rng_seed: u64,
}

impl From<&GsGaConfig> for GaConfig {
    fn from(c: &GsGaConfig) -> Self {
        GaConfig {
            population: c.population as usize,
            elite_count: c.elite_count as usize,
            mutation_probability: c.mutation_probability,
            crossover_fraction: c.crossover_fraction,
            max_generations: c.max_generations as usize,
            fitness_tolerance: c.fitness_tolerance,
            stall_generations: c.stall_generations as usize,
            lower_bound: c.lower_bound,
            upper_bound: c.upper_bound,
            rng_seed: c.rng_seed,
        }
    }
}

#[no_mangle]
pub extern "C" fn gs_ga_config_default() -> GsGaConfig {
    let d = GaConfig::default();
    GsGaConfig {
        population: d.population as u32,
        elite_count: d.elite_count as u32,
        mutation_probability: d.mutation_probability,
        crossover_fraction: d.crossover_fraction,
        max_generations: d.max_generations as u32,
        fitness_tolerance: d.fitness_tolerance,
        stall_generations: d.stall_generations as u32,
        lower_bound: d.lower_bound,
        upper_bound: d.upper_bound,
        rng_seed: d.rng_seed,
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GsScaleEstimate {
    pub scale: f64,
    pub fitness: f64,
    pub degenerate: bool,
}

unsafe fn best_scale(
    signal: *const f64,
    len: usize,
    translation: usize,
    optimizer: OptimizerConfig,
    out: *mut GsScaleEstimate,
) -> GsStatus {
    guard(|| {
        let s = slice_arg(signal, len, "signal")?;
        let out = out_arg(out, "out")?;
        let e = best_scale_at(s, translation, &optimizer).map_err(lib)?;
        *out = GsScaleEstimate {
            scale: e.scale,
            fitness: e.fitness,
            degenerate: e.degenerate,
        };
        Ok(())
    })
}

/// Best scale at `translation` by particle swarm search.
///
/// # Safety
/// `signal` must point to `len` readable doubles; `config` and `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn gs_best_scale_pso(
    signal: *const f64,
    len: usize,
    translation: usize,
    config: *const GsSwarmConfig,
    out: *mut GsScaleEstimate,
) -> GsStatus {
    match config.as_ref() {
        Some(c) => best_scale(signal, len, translation, OptimizerConfig::Pso(c.into()), out),
        None => guard(|| Err(null("config"))),
    }
}

/// Best scale at `translation` by genetic search.
///
/// # Safety
/// As [`gs_best_scale_pso`].
#[no_mangle]
pub unsafe extern "C" fn gs_best_scale_ga(
    signal: *const f64,
    len: usize,
    translation: usize,
    config: *const GsGaConfig,
    out: *mut GsScaleEstimate,
) -> GsStatus {
    match config.as_ref() {
        Some(c) => best_scale(signal, len, translation, OptimizerConfig::Ga(c.into()), out),
        None => guard(|| Err(null("config"))),
    }
}

/// Scale-distribution feature of one frame: the best PSO scale at every
/// sample, histogrammed into `n_bins` equal bins over the swarm's bounds.
/// `threads` is 1 for serial, 0 for every core.
///
/// # Safety
/// `frame` must point to `len` doubles and `counts_out` to `n_bins`
/// writable `uint32_t`.
#[no_mangle]
pub unsafe extern "C" fn gs_extract_features(
    frame: *const f64,
    len: usize,
    config: *const GsSwarmConfig,
    n_bins: usize,
    threads: usize,
    counts_out: *mut u32,
) -> GsStatus {
    guard(|| {
        let s = slice_arg(frame, len, "frame")?;
        let cfg: SwarmConfig = ref_arg(config, "config")?.into();
        if counts_out.is_null() {
            return Err(null("counts_out"));
        }
        let bins = BinSpec {
            n_bins,
            lower: cfg.lower_bound,
            upper: cfg.upper_bound,
        };
        let parallelism = match threads {
            1 => Parallelism::Serial,
            n => Parallelism::Threads(n),
        };
        let est = scan_frame(s, &OptimizerConfig::Pso(cfg), parallelism).map_err(lib)?;
        let scales: Vec<f64> = est.iter().map(|e| e.scale).collect();
        let counts = scale_distribution(&scales, &bins).map_err(lib)?;
        slice::from_raw_parts_mut(counts_out, n_bins).copy_from_slice(&counts);
        Ok(())
    })
}

/// Opaque signal handle.
pub struct GsSignal(Signal);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GsSynthConfig {
    pub shaft_speed_rpm: f64,
    pub driver_teeth: u32,
    pub driven_teeth: u32,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub mesh_amplitude: f64,
    pub impulse_amplitude: f64,
    pub impulse_decay_rate: f64,
    pub noise_std: f64,
    pub rng_seed: u64,
}

#[no_mangle]
pub extern "C" fn gs_synth_config_default() -> GsSynthConfig {
    let d = SynthConfig::default();
    GsSynthConfig {
        shaft_speed_rpm: d.shaft_speed_rpm,
        driver_teeth: d.driver_teeth,
        driven_teeth: d.driven_teeth,
        sample_rate_hz: d.sample_rate_hz,
        duration_s: d.duration_s,
        mesh_amplitude: d.mesh_amplitude,
        impulse_amplitude: d.impulse_amplitude,
        impulse_decay_rate: d.impulse_decay_rate,
        noise_std: d.noise_std,
        rng_seed: d.rng_seed,
    }
}

fn store<T>(out: *mut *mut T, value: T) -> Result<(), (GsStatus, String)> {
    // SAFETY: the caller checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Synthesize a gearbox record.
///
/// # Safety
/// `config` must be valid and `out` writable; free the result with
/// [`gs_signal_free`].
#[no_mangle]
pub unsafe extern "C" fn gs_signal_synthesize(config: *const GsSynthConfig, out: *mut *mut GsSignal) -> GsStatus {
    guard(|| {
        let c = ref_arg(config, "config")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SynthConfig {
            shaft_speed_rpm: c.shaft_speed_rpm,
            driver_teeth: c.driver_teeth,
            driven_teeth: c.driven_teeth,
            sample_rate_hz: c.sample_rate_hz,
            duration_s: c.duration_s,
            mesh_amplitude: c.mesh_amplitude,
            impulse_amplitude: c.impulse_amplitude,
            impulse_decay_rate: c.impulse_decay_rate,
            noise_std: c.noise_std,
            rng_seed: c.rng_seed,
        };
        store(out, GsSignal(synthesize_gearbox(&cfg).map_err(lib)?))
    })
}

/// Load a text signal file (one sample per line).
///
/// # Safety
/// `path` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_signal_load(path: *const c_char, sample_rate_hz: f64, out: *mut *mut GsSignal) -> GsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        store(out, GsSignal(load_signal(path, sample_rate_hz).map_err(lib)?))
    })
}

/// Number of samples, 0 for a null handle.
///
/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_signal_len(signal: *const GsSignal) -> usize {
    signal.as_ref().map_or(0, |s| s.0.len())
}

/// Borrow the samples; valid until the handle is freed.
///
/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_signal_samples(signal: *const GsSignal) -> *const f64 {
    signal.as_ref().map_or(ptr::null(), |s| s.0.samples().as_ptr())
}

/// # Safety
/// `signal` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_signal_free(signal: *mut GsSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// Opaque trained-classifier handle.
pub struct GsClassifier(FaultClassifier);

/// Load a model file written by the `gearscan train` command.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` writable; free the
/// result with [`gs_classifier_free`].
#[no_mangle]
pub unsafe extern "C" fn gs_classifier_load(path: *const c_char, out: *mut *mut GsClassifier) -> GsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        store(out, GsClassifier(FaultClassifier::load(path).map_err(lib)?))
    })
}

/// Parse a model document held in memory.
///
/// # Safety
/// As [`gs_classifier_load`], with `json` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gs_classifier_from_json(json: *const c_char, out: *mut *mut GsClassifier) -> GsStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        store(out, GsClassifier(FaultClassifier::from_json(text).map_err(lib)?))
    })
}

/// Feature dimension the classifier expects, 0 for a null handle.
///
/// # Safety
/// `classifier` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_classifier_dim(classifier: *const GsClassifier) -> usize {
    classifier.as_ref().map_or(0, |c| c.0.dim())
}

/// Signed distance-like score; positive means chipped.
///
/// # Safety
/// `classifier` must be live, `features` must point to `len` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gs_classifier_decision_value(
    classifier: *const GsClassifier,
    features: *const f64,
    len: usize,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        let c = ref_arg(classifier, "classifier")?;
        let x = slice_arg(features, len, "features")?;
        *out_arg(out, "out")? = c.0.decision_value(x).map_err(lib)?;
        Ok(())
    })
}

/// Predicted label: -1 healthy, +1 chipped.
///
/// # Safety
/// As [`gs_classifier_decision_value`].
#[no_mangle]
pub unsafe extern "C" fn gs_classifier_predict(
    classifier: *const GsClassifier,
    features: *const f64,
    len: usize,
    out: *mut i8,
) -> GsStatus {
    guard(|| {
        let c = ref_arg(classifier, "classifier")?;
        let x = slice_arg(features, len, "features")?;
        *out_arg(out, "out")? = c.0.predict(x).map_err(lib)?;
        Ok(())
    })
}

/// # Safety
/// `classifier` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_classifier_free(classifier: *mut GsClassifier) {
    if !classifier.is_null() {
        drop(Box::from_raw(classifier));
    }
}

#ifndef GEARSCAN_H
#define GEARSCAN_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_ARGUMENT = 2,
  GS_STATUS_IO = 3,
  GS_STATUS_PARSE = 4,
  GS_STATUS_NUMERIC = 5,
  GS_STATUS_TRAINING = 6,
  GS_STATUS_PANIC = 7,
} GsStatus;

/**
 * Opaque trained-classifier handle.
 */
typedef struct GsClassifier GsClassifier;

/**
 * Opaque signal handle.
 */
typedef struct GsSignal GsSignal;

/**
 * Particle swarm settings. `v_max <= 0` or infinite means unbounded.
 */
typedef struct GsSwarmConfig {
  double inertia;
  double c1;
  double c2;
  double v_max;
  double lower_bound;
  double upper_bound;
  uint32_t population;
  uint32_t max_generations;
  double stall_time_limit_s;
  double time_limit_s;
  uint64_t rng_seed;
} GsSwarmConfig;

typedef struct GsGaConfig {
  uint32_t population;
  uint32_t elite_count;
  double mutation_probability;
  double crossover_fraction;
  uint32_t max_generations;
  double fitness_tolerance;
  uint32_t stall_generations;
  double lower_bound;
  double upper_bound;
  uint64_t rng_seed;
} GsGaConfig;

typedef struct GsScaleEstimate {
  double scale;
  double fitness;
  bool degenerate;
} GsScaleEstimate;

typedef struct GsSynthConfig {
  double shaft_speed_rpm;
  uint32_t driver_teeth;
  uint32_t driven_teeth;
  double sample_rate_hz;
  double duration_s;
  double mesh_amplitude;
  double impulse_amplitude;
  double impulse_decay_rate;
  double noise_std;
  uint64_t rng_seed;
} GsSynthConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on this thread.
 */
const char *gs_last_error_message(void);

/**
 * Real Morlet mother wavelet `exp(-t^2/2) cos(5t)`.
 */
double gs_morlet(double t);

/**
 * Cosine similarity between the daughter wavelet at `(scale, translation)`
 * and the signal under its support.
 *
 * # Safety
 * `signal` must point to `len` readable doubles; the out pointers must be
 * writable.
 */
enum GsStatus gs_shape_fitness(const double *signal,
                               size_t len,
                               double scale,
                               double translation,
                               double *out_fitness,
                               bool *out_degenerate);

struct GsSwarmConfig gs_swarm_config_default(void);

struct GsGaConfig gs_ga_config_default(void);

/**
 * Best scale at `translation` by particle swarm search.
 *
 * # Safety
 * `signal` must point to `len` readable doubles; `config` and `out` must be
 * valid.
 */
enum GsStatus gs_best_scale_pso(const double *signal,
                                size_t len,
                                size_t translation,
                                const struct GsSwarmConfig *config,
                                struct GsScaleEstimate *out);

/**
 * Best scale at `translation` by genetic search.
 *
 * # Safety
 * As [`gs_best_scale_pso`].
 */
enum GsStatus gs_best_scale_ga(const double *signal,
                               size_t len,
                               size_t translation,
                               const struct GsGaConfig *config,
                               struct GsScaleEstimate *out);

/**
 * Scale-distribution feature of one frame: the best PSO scale at every
 * sample, histogrammed into `n_bins` equal bins over the swarm's bounds.
 * `threads` is 1 for serial, 0 for every core.
 *
 * # Safety
 * `frame` must point to `len` doubles and `counts_out` to `n_bins`
 * writable `uint32_t`.
 */
enum GsStatus gs_extract_features(const double *frame,
                                  size_t len,
                                  const struct GsSwarmConfig *config,
                                  size_t n_bins,
                                  size_t threads,
                                  uint32_t *counts_out);

struct GsSynthConfig gs_synth_config_default(void);

/**
 * Synthesize a gearbox record.
 *
 * # Safety
 * `config` must be valid and `out` writable; free the result with
 * [`gs_signal_free`].
 */
enum GsStatus gs_signal_synthesize(const struct GsSynthConfig *config, struct GsSignal **out);

/**
 * Load a text signal file (one sample per line).
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` writable.
 */
enum GsStatus gs_signal_load(const char *path, double sample_rate_hz, struct GsSignal **out);

/**
 * Number of samples, 0 for a null handle.
 *
 * # Safety
 * `signal` must be null or a live handle.
 */
size_t gs_signal_len(const struct GsSignal *signal);

/**
 * Borrow the samples; valid until the handle is freed.
 *
 * # Safety
 * `signal` must be null or a live handle.
 */
const double *gs_signal_samples(const struct GsSignal *signal);

/**
 * # Safety
 * `signal` must be null or a handle not yet freed.
 */
void gs_signal_free(struct GsSignal *signal);

/**
 * Load a model file written by the `gearscan train` command.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` writable; free the
 * result with [`gs_classifier_free`].
 */
enum GsStatus gs_classifier_load(const char *path, struct GsClassifier **out);

/**
 * Parse a model document held in memory.
 *
 * # Safety
 * As [`gs_classifier_load`], with `json` a nul-terminated string.
 */
enum GsStatus gs_classifier_from_json(const char *json, struct GsClassifier **out);

/**
 * Feature dimension the classifier expects, 0 for a null handle.
 *
 * # Safety
 * `classifier` must be null or a live handle.
 */
size_t gs_classifier_dim(const struct GsClassifier *classifier);

/**
 * Signed distance-like score; positive means chipped.
 *
 * # Safety
 * `classifier` must be live, `features` must point to `len` doubles and
 * `out` must be writable.
 */
enum GsStatus gs_classifier_decision_value(const struct GsClassifier *classifier,
                                           const double *features,
                                           size_t len,
                                           double *out);

/**
 * Predicted label: -1 healthy, +1 chipped.
 *
 * # Safety
 * As [`gs_classifier_decision_value`].
 */
enum GsStatus gs_classifier_predict(const struct GsClassifier *classifier,
                                    const double *features,
                                    size_t len,
                                    int8_t *out);

/**
 * # Safety
 * `classifier` must be null or a handle not yet freed.
 */
void gs_classifier_free(struct GsClassifier *classifier);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEARSCAN_H */

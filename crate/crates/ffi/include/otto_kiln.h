#ifndef OTTO_KILN_H
#define OTTO_KILN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum OttoMode {
  OTTO_MODE_OTTO = 0,
  OTTO_MODE_PUMP = 1,
} OttoMode;

typedef enum OttoStatus {
  OTTO_STATUS_OK = 0,
  OTTO_STATUS_NULL_POINTER = 1,
  OTTO_STATUS_INVALID_PARAMETER = 2,
  OTTO_STATUS_INVALID_DISTRIBUTION = 3,
  OTTO_STATUS_UNDER_TRUNCATION = 4,
  OTTO_STATUS_INSTABILITY = 5,
  OTTO_STATUS_NORMALIZATION_DRIFT = 6,
  OTTO_STATUS_CONFIG = 7,
  OTTO_STATUS_IO = 8,
  OTTO_STATUS_OUT_OF_RANGE = 9,
  OTTO_STATUS_BUFFER_TOO_SMALL = 10,
  OTTO_STATUS_PANIC = 255,
} OttoStatus;

// Engine configuration handle.
typedef struct OttoConfig OttoConfig;

// Result of an efficiency–power sweep.
typedef struct OttoSweep OttoSweep;

// Result of a full engine run.
typedef struct OttoTrace OttoTrace;

// One cycle's ledger. `efficiency` is NaN when undefined.
typedef struct OttoCycleSummary {
  size_t cycle_index;
  double q_in;
  double w_out;
  double q_out;
  double w_in;
  double w_eff;
  double q_pump;
  double pump_energy;
  double efficiency;
  double power;
  double cyclostationarity;
  double first_law_residual;
} OttoCycleSummary;

typedef struct OttoSample {
  double time;
  double omega;
  double energy;
  double entropy;
  size_t cycle;
} OttoSample;

// `efficiency` is NaN when undefined.
typedef struct OttoSweepPoint {
  double t_h;
  double ratio;
  double efficiency;
  double power;
  bool converged;
} OttoSweepPoint;

typedef struct OttoAnalyticCycle {
  double q_in;
  double w_out;
  double q_out;
  double w_in;
  double w_eff;
  double efficiency;
} OttoAnalyticCycle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *otto_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *otto_version(void);

// Creates a configuration with the standard defaults.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum OttoStatus otto_config_default(struct OttoConfig **out);

// Parses a configuration document.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum OttoStatus otto_config_parse(const char *text, struct OttoConfig **out);

// Sets a numeric engine parameter by name: `omega_c`, `omega_h`, `t_c`,
// `t_h`, `gamma0`, `tau`, `tau_bc`, `tau_cd` or `tau_db`.
//
// # Safety
// `config` must come from this library; `key` must be NUL-terminated.
enum OttoStatus otto_config_set(struct OttoConfig *config, const char *key, double value);

// # Safety
// `config` must come from this library.
enum OttoStatus otto_config_set_cycles(struct OttoConfig *config, size_t n_cycles);

// # Safety
// `config` must come from this library.
enum OttoStatus otto_config_set_mode(struct OttoConfig *config, enum OttoMode mode);

// # Safety
// `config` must be NULL or come from this library, and not be used afterwards.
void otto_config_free(struct OttoConfig *config);

// Runs the configured engine (Otto or pump mode).
//
// # Safety
// `config` must come from this library; `out` must be writable.
enum OttoStatus otto_run(const struct OttoConfig *config, struct OttoTrace **out);

// # Safety
// `trace` must be NULL or come from this library, and not be used afterwards.
void otto_trace_free(struct OttoTrace *trace);

// Number of cycles in the trace; 0 for NULL.
//
// # Safety
// `trace` must be NULL or come from this library.
size_t otto_trace_cycle_count(const struct OttoTrace *trace);

// Number of time-series samples in the trace; 0 for NULL.
//
// # Safety
// `trace` must be NULL or come from this library.
size_t otto_trace_sample_count(const struct OttoTrace *trace);

// Whether the last cycle reached the cyclostationary tolerance.
//
// # Safety
// `trace` must come from this library; `out` must be writable.
enum OttoStatus otto_trace_converged(const struct OttoTrace *trace, bool *out);

// # Safety
// `trace` must come from this library; `out` must be writable.
enum OttoStatus otto_trace_cycle(const struct OttoTrace *trace,
                                 size_t index,
                                 struct OttoCycleSummary *out);

// # Safety
// `trace` must come from this library; `out` must be writable.
enum OttoStatus otto_trace_sample(const struct OttoTrace *trace,
                                  size_t index,
                                  struct OttoSample *out);

// Copies the populations of sample `index` into `buffer`. `len_out`
// receives the ladder size; pass a NULL `buffer` to query it.
//
// # Safety
// `buffer` must be NULL or hold `capacity` writable doubles; `len_out` must be writable.
enum OttoStatus otto_trace_populations(const struct OttoTrace *trace,
                                       size_t index,
                                       double *buffer,
                                       size_t capacity,
                                       size_t *len_out);

// Runs the efficiency–power sweep described by the configuration's sweep
// settings, using at most `threads` workers (0 = library default).
//
// # Safety
// `config` must come from this library; `out` must be writable.
enum OttoStatus otto_sweep(const struct OttoConfig *config, size_t threads, struct OttoSweep **out);

// # Safety
// `sweep` must be NULL or come from this library.
size_t otto_sweep_len(const struct OttoSweep *sweep);

// # Safety
// `sweep` must come from this library; `out` must be writable.
enum OttoStatus otto_sweep_point(const struct OttoSweep *sweep,
                                 size_t index,
                                 struct OttoSweepPoint *out);

// # Safety
// `sweep` must be NULL or come from this library, and not be used afterwards.
void otto_sweep_free(struct OttoSweep *sweep);

// Mean thermal occupation 1/(e^{ω/T} − 1).
//
// # Safety
// `out` must be writable.
enum OttoStatus otto_bose_einstein(double omega, double temperature, double *out);

// 1 − ω_c/ω_h.
double otto_otto_limit(double omega_c, double omega_h);

// 1 − T_c/T_h.
double otto_carnot_limit(double t_c, double t_h);

// Closed-form ledger of a cycle whose isochores reach equilibrium.
//
// # Safety
// `out` must be writable.
enum OttoStatus otto_analytic_cycle(double omega_c,
                                    double omega_h,
                                    double t_c,
                                    double t_h,
                                    struct OttoAnalyticCycle *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OTTO_KILN_H */

#ifndef LEPSCHED_H
#define LEPSCHED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LEP_OK 0

#define LEP_ERR_NULL 1

#define LEP_ERR_INVALID 2

#define LEP_ERR_SIZE_GUARD 3

#define LEP_ERR_IO 4

#define LEP_ERR_PANIC 5

// Hiring decision handle.
typedef struct LepHiring LepHiring;

// Problem instance handle.
typedef struct LepInstance LepInstance;

typedef struct LepStats {
  size_t n_scenarios;
  double mean_total;
  double std_total;
  double mean_wait;
  double service_level_emergency;
  double service_level_outpatient;
  double fixed;
  double variable;
  double overtime;
  double penalty;
} LepStats;

typedef struct LepGapInterval {
  double z;
  double ci_low;
  double ci_high;
  double gap_pct;
} LepGapInterval;

typedef struct LepSaaSummary {
  double lb_mean;
  double sigma_lb;
  double ub;
  double sigma_ub;
  double gap;
  double sigma_gap;
  struct LepGapInterval interval;
  size_t m_star;
  bool negative_gap_flag;
} LepSaaSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Owned by the
// library; valid until the next call on the same thread.
const char *lep_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void lep_string_free(char *s);

// Loads an instance file (JSON).
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
int32_t lep_instance_load(const char *path, struct LepInstance **out);

// The shipped base case.
//
// # Safety
// `out` must be writable.
int32_t lep_instance_base_case(struct LepInstance **out);

// Validated and simplified copy of `inst`. Solvers expect simplified
// instances.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
int32_t lep_instance_simplify(const struct LepInstance *inst, struct LepInstance **out);

// Number of part-timers, the length of every hiring bit string.
//
// # Safety
// `inst` must be a live handle or null.
size_t lep_instance_part_timers(const struct LepInstance *inst);

// Pretty JSON of the instance; release with [`lep_string_free`].
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
int32_t lep_instance_to_json(const struct LepInstance *inst, char **out);

// # Safety
// `inst` must come from this library and not be freed twice.
void lep_instance_free(struct LepInstance *inst);

// Hiring decision from a string of `0`/`1`, one per part-timer in group
// order.
//
// # Safety
// `inst` must be a live handle, `bits` nul-terminated, `out` writable.
int32_t lep_hiring_from_bits(const struct LepInstance *inst,
                             const char *bits,
                             struct LepHiring **out);

// Bit string of a hiring decision; release with [`lep_string_free`].
//
// # Safety
// `w` must be a live handle; `out` must be writable.
int32_t lep_hiring_bits(const struct LepHiring *w, char **out);

// # Safety
// `w` must be a live handle or null.
size_t lep_hiring_count(const struct LepHiring *w);

// # Safety
// `w` must come from this library and not be freed twice.
void lep_hiring_free(struct LepHiring *w);

// Tabu search with default parameters except `iterations`,
// `fitness_scenarios` and `seed`. Zero keeps the default.
//
// # Safety
// `inst` must be a live handle; `out` writable; `fitness` writable or null.
int32_t lep_solve_ts(const struct LepInstance *inst,
                     size_t iterations,
                     size_t fitness_scenarios,
                     uint64_t seed,
                     struct LepHiring **out,
                     double *fitness);

// Exact solution of the sample problem on `n_scenarios` sampled
// scenarios. Fails with [`LEP_ERR_SIZE_GUARD`] on instances too large.
//
// # Safety
// `inst` must be a live handle; `out` writable; `objective` writable or null.
int32_t lep_solve_exact(const struct LepInstance *inst,
                        size_t n_scenarios,
                        uint64_t seed,
                        struct LepHiring **out,
                        double *objective);

// Simulates `w` on `n` scenarios.
//
// # Safety
// Handles must be live; `out` writable.
int32_t lep_simulate(const struct LepInstance *inst,
                     const struct LepHiring *w,
                     size_t n,
                     uint64_t seed,
                     struct LepStats *out);

// Confidence interval of an optimality gap.
//
// # Safety
// `out` must be writable.
int32_t lep_gap_interval(double gap,
                         double sigma_gap,
                         double lb_mean,
                         double confidence,
                         struct LepGapInterval *out);

// Sample average approximation with the exact inner solver. `best`
// receives the selected hiring decision when not null.
//
// # Safety
// `inst` must be a live handle; `out` writable; `best` writable or null.
int32_t lep_saa(const struct LepInstance *inst,
                size_t samples,
                size_t replications,
                size_t eval_samples,
                double confidence,
                uint64_t seed,
                struct LepSaaSummary *out,
                struct LepHiring **best);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEPSCHED_H */

#ifndef MOLDKIT_H
#define MOLDKIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  MOLD_STATUS_OK = 0,
  MOLD_STATUS_NULL_POINTER = 1,
  MOLD_STATUS_INVALID_UTF8 = 2,
  MOLD_STATUS_PARSE_ERROR = 3,
  MOLD_STATUS_INVALID_INSTANCE = 4,
  MOLD_STATUS_INVALID_ARGUMENT = 5,
  MOLD_STATUS_SOLVE_FAILED = 6,
  MOLD_STATUS_OUT_OF_RANGE = 7,
  MOLD_STATUS_PANIC = 8,
} MoldStatus;

/**
 * Machine count plus jobs, validated when first needed.
 */
typedef struct MoldInstance MoldInstance;

typedef struct MoldSolveResult MoldSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. Valid
 * until the next failing call on the same thread.
 */
const char *mold_last_error_message(void);

/**
 * Creates an empty instance on `m` machines.
 *
 * # Safety
 * `out_instance` must be a valid pointer.
 */
MoldStatus mold_instance_new(uint64_t m, MoldInstance **out_instance);

/**
 * Parses the `MOLD 1` text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out_instance` a valid pointer.
 */
MoldStatus mold_instance_parse(const char *text, MoldInstance **out_instance);

/**
 * Appends a job with `t(k) = a * k^-beta`.
 *
 * # Safety
 * `instance` must come from this library and not be freed.
 */
MoldStatus mold_instance_add_powerlaw(MoldInstance *instance, double a, double beta);

/**
 * Appends a job given by `len` times for `1..=len` machines; `len` must
 * equal the machine count.
 *
 * # Safety
 * `instance` must be live and `times` must point to `len` doubles.
 */
MoldStatus mold_instance_add_table(MoldInstance *instance, const double *times, uintptr_t len);

/**
 * Number of jobs, or 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or live.
 */
uintptr_t mold_instance_job_count(const MoldInstance *instance);

/**
 * # Safety
 * `instance` must be null or a live handle; it is invalid afterwards.
 */
void mold_instance_free(MoldInstance *instance);

/**
 * Fewest machines on which `job` finishes within `d`; writes 0 when no
 * machine count suffices.
 *
 * # Safety
 * `instance` must be live and `out_machines` valid.
 */
MoldStatus mold_instance_gamma(MoldInstance *instance,
                               uintptr_t job,
                               double d,
                               uint64_t *out_machines);

/**
 * Runs the dual approximation driver at accuracy `eps`.
 *
 * # Safety
 * `instance` must be live and `out_result` valid.
 */
MoldStatus mold_solve(MoldInstance *instance, double eps, MoldSolveResult **out_result);

/**
 * # Safety
 * `result` must be null or live.
 */
double mold_result_makespan(const MoldSolveResult *result);

/**
 * # Safety
 * `result` must be null or live.
 */
double mold_result_lower_bound(const MoldSolveResult *result);

/**
 * Proven ratio of the returned makespan to the optimum.
 *
 * # Safety
 * `result` must be null or live.
 */
double mold_result_guarantee(const MoldSolveResult *result);

/**
 * Human-readable algorithm label, owned by the result.
 *
 * # Safety
 * `result` must be null or live.
 */
const char *mold_result_label(const MoldSolveResult *result);

/**
 * Number of schedule entries.
 *
 * # Safety
 * `result` must be null or live.
 */
uintptr_t mold_result_entry_count(const MoldSolveResult *result);

/**
 * Entry `index` of the schedule; entries are not ordered by job.
 *
 * # Safety
 * `result` must be live and the three output pointers valid.
 */
MoldStatus mold_result_entry(const MoldSolveResult *result,
                             uintptr_t index,
                             uintptr_t *out_job,
                             uint64_t *out_machines,
                             double *out_start);

/**
 * # Safety
 * `result` must be null or a live handle; it is invalid afterwards.
 */
void mold_result_free(MoldSolveResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOLDKIT_H */

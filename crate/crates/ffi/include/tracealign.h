#ifndef TRACEALIGN_H
#define TRACEALIGN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; values are stable.
 */
typedef enum TaStatus {
  TA_STATUS_OK = 0,
  TA_STATUS_MALFORMED_LINE = 1,
  TA_STATUS_MISSING_FIELD = 2,
  TA_STATUS_INVALID_FIELD = 3,
  TA_STATUS_UNKNOWN_TASK = 4,
  TA_STATUS_NON_MONOTONE_TIMESTAMPS = 5,
  TA_STATUS_TIME_BOUNDS = 6,
  TA_STATUS_DUPLICATE_RUN_ID = 7,
  TA_STATUS_INVALID_TASK = 8,
  TA_STATUS_INVALID_STATE_MAP = 9,
  TA_STATUS_EMPTY_SAMPLE = 10,
  TA_STATUS_DEGENERATE_TABLE = 11,
  TA_STATUS_EMPTY_COHORT = 12,
  TA_STATUS_SIZE_EXCEEDS_POOL = 13,
  TA_STATUS_INVALID_PROFILE = 14,
  TA_STATUS_INVALID_ARGUMENT = 15,
  TA_STATUS_IO_ERROR = 16,
  TA_STATUS_NULL_POINTER = 100,
  TA_STATUS_INVALID_UTF8 = 101,
  TA_STATUS_PANIC = 102,
} TaStatus;

/**
 * Opaque parsed corpus.
 */
typedef struct TaCorpus TaCorpus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ta_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ta_version(void);

/**
 * Parses a corpus from in-memory JSON Lines traces, a JSON task array
 * and an optional state map (`states` may be NULL).
 *
 * # Safety
 * Each non-null pointer must reference at least the given number of
 * readable bytes; `out` must be a valid pointer.
 */
enum TaStatus ta_corpus_parse(const uint8_t *traces,
                              size_t traces_len,
                              const uint8_t *tasks,
                              size_t tasks_len,
                              const uint8_t *states,
                              size_t states_len,
                              struct TaCorpus **out);

/**
 * # Safety
 * `corpus` must be NULL or a pointer obtained from [`ta_corpus_parse`]
 * that has not been freed.
 */
void ta_corpus_free(struct TaCorpus *corpus);

/**
 * Number of runs in the corpus, or 0 for NULL.
 *
 * # Safety
 * `corpus` must be NULL or a live corpus handle.
 */
size_t ta_corpus_run_count(const struct TaCorpus *corpus);

/**
 * Number of runs of one cohort (0 = agent, 1 = participant).
 *
 * # Safety
 * `corpus` must be NULL or a live corpus handle.
 */
size_t ta_corpus_cohort_count(const struct TaCorpus *corpus, uint32_t cohort);

/**
 * Full JSON report. `config_json` may be NULL for defaults or a JSON
 * object overriding any subset of the configuration fields.
 *
 * # Safety
 * `corpus` must be a live handle, `config_json` NULL or NUL-terminated,
 * and `out` a valid pointer. Free the result with [`ta_string_free`].
 */
enum TaStatus ta_report_json(const struct TaCorpus *corpus, const char *config_json, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void ta_string_free(char *s);

/**
 * Wilson score interval for `successes` of `n`.
 *
 * # Safety
 * `lo` and `hi` must be valid pointers.
 */
enum TaStatus ta_wilson_ci(uint64_t successes,
                           uint64_t n,
                           double confidence,
                           double *lo,
                           double *hi);

/**
 * Two-sided Mann–Whitney U. `u` receives min(U_x, U_y).
 *
 * # Safety
 * `x` and `y` must reference `nx` and `ny` doubles; outputs must be valid.
 */
enum TaStatus ta_mann_whitney_u(const double *x,
                                size_t nx,
                                const double *y,
                                size_t ny,
                                double *u,
                                double *p);

/**
 * Pearson χ² on the 2×2 table [[a, b], [c, d]] without continuity
 * correction.
 *
 * # Safety
 * `statistic` and `p` must be valid pointers.
 */
enum TaStatus ta_pearson_chi2_2x2(uint64_t a,
                                  uint64_t b,
                                  uint64_t c,
                                  uint64_t d,
                                  double *statistic,
                                  double *p);

/**
 * Gestalt ratio of two NUL-terminated UTF-8 strings, compared as given.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated; `out` must be valid.
 */
enum TaStatus ta_gestalt_ratio(const char *a, const char *b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACEALIGN_H */

#ifndef FILTER_ERGODICS_H
#define FILTER_ERGODICS_H

/* Generated by cbindgen from the filter-ergodics-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum FeStatus {
  FE_STATUS_OK = 0,
  FE_STATUS_NULL_ARGUMENT = 1,
  FE_STATUS_INVALID_UTF8 = 2,
  FE_STATUS_PARSE_ERROR = 3,
  FE_STATUS_VALIDATION_ERROR = 4,
  FE_STATUS_UNKNOWN_LABEL = 5,
  FE_STATUS_IMPOSSIBLE_OBSERVATION = 6,
  FE_STATUS_BUFFER_SIZE = 7,
  FE_STATUS_INDEX_OUT_OF_RANGE = 8,
  FE_STATUS_RUNTIME_ERROR = 9,
} FeStatus;

/**
 * Opaque filter handle: the current conditional law of the hidden state,
 * the observation it was last conditioned on, and the cumulative log
 * likelihood of the observation record so far.
 */
typedef struct FeFilter FeFilter;

/**
 * Opaque model handle: a validated kernel with its invariant law.
 */
typedef struct FeModel FeModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the underlying library; static storage, do not free.
 */
const char *fe_version(void);

/**
 * Copy the last error message for this thread into `buf` (NUL-terminated,
 * truncated to `cap` bytes). Returns the full message length in bytes,
 * excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to at least `cap` writable bytes.
 */
uintptr_t fe_last_error(char *buf, uintptr_t cap);

/**
 * Parse a model from its JSON description and compute (or validate) its
 * invariant law. On success `*out` owns the new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FeStatus fe_model_from_json(const char *json, struct FeModel **out);

/**
 * Construct one of the built-in models by zoo name
 * (e.g. `"example-1.1"`, `"example-1.1-noisy:0.1"`,
 * `"random-nondegenerate:3x2:7"`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FeStatus fe_model_from_zoo(const char *name, struct FeModel **out);

/**
 * Release a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must be null or a handle from this library not yet freed.
 */
void fe_model_free(struct FeModel *model);

/**
 * Number of hidden states; zero for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t fe_model_hidden_count(const struct FeModel *model);

/**
 * Number of observed states; zero for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t fe_model_observed_count(const struct FeModel *model);

/**
 * Index of a hidden-state label.
 *
 * # Safety
 * `model` must be null or live, `label` NUL-terminated, `out` valid.
 */
enum FeStatus fe_model_hidden_index(const struct FeModel *model, const char *label, uintptr_t *out);

/**
 * Index of an observed-state label.
 *
 * # Safety
 * `model` must be null or live, `label` NUL-terminated, `out` valid.
 */
enum FeStatus fe_model_observed_index(const struct FeModel *model,
                                      const char *label,
                                      uintptr_t *out);

/**
 * Copy the invariant law over pair states (`z * observed_count + w`) into
 * `buf`, which must hold exactly `hidden_count * observed_count` doubles.
 *
 * # Safety
 * `model` must be null or live; `buf` must point to `len` doubles.
 */
enum FeStatus fe_model_stationary(const struct FeModel *model, double *buf, uintptr_t len);

/**
 * Whether the kernel factorizes over a strictly positive density
 * (1 = factorization exists, 0 = refuted).
 *
 * # Safety
 * `model` must be null or live; `out` must be a valid pointer.
 */
enum FeStatus fe_model_is_nondegenerate(const struct FeModel *model, int32_t *out);

/**
 * Whether the eigenvalue-1 eigenspace of the kernel is one-dimensional.
 *
 * # Safety
 * `model` must be null or live; `out` must be a valid pointer.
 */
enum FeStatus fe_model_has_unique_invariant_law(const struct FeModel *model, int32_t *out);

/**
 * Start a filter from the invariant law conditioned on the first
 * observation `y0`.
 *
 * # Safety
 * `model` must be null or live; `out` must be a valid pointer.
 */
enum FeStatus fe_filter_init_stationary(const struct FeModel *model,
                                        uintptr_t y0,
                                        struct FeFilter **out);

/**
 * Start a filter from the uniform law on the hidden space.
 *
 * # Safety
 * `model` must be null or live; `out` must be a valid pointer.
 */
enum FeStatus fe_filter_init_uniform(const struct FeModel *model,
                                     uintptr_t y0,
                                     struct FeFilter **out);

/**
 * Start a filter from a point mass at hidden state `z`.
 *
 * # Safety
 * `model` must be null or live; `out` must be a valid pointer.
 */
enum FeStatus fe_filter_init_point(const struct FeModel *model,
                                   uintptr_t z,
                                   uintptr_t y0,
                                   struct FeFilter **out);

/**
 * Condition the filter on the next observation `y1`. On
 * `FE_STATUS_IMPOSSIBLE_OBSERVATION` the filter state is left unchanged.
 *
 * # Safety
 * `filter` must be null or a live handle.
 */
enum FeStatus fe_filter_step(struct FeFilter *filter, uintptr_t y1);

/**
 * Copy the current hidden-state probabilities into `buf` of length
 * `hidden_count`.
 *
 * # Safety
 * `filter` must be null or live; `buf` must point to `len` doubles.
 */
enum FeStatus fe_filter_probs(const struct FeFilter *filter, double *buf, uintptr_t len);

/**
 * Cumulative log likelihood of the observation moves applied so far
 * (zero right after initialization).
 *
 * # Safety
 * `filter` must be null or live; `out` must be a valid pointer.
 */
enum FeStatus fe_filter_log_likelihood(const struct FeFilter *filter, double *out);

/**
 * Release a filter handle. Null is a no-op.
 *
 * # Safety
 * `filter` must be null or a handle from this library not yet freed.
 */
void fe_filter_free(struct FeFilter *filter);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FILTER_ERGODICS_H */

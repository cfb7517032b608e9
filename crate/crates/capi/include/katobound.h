#ifndef KATOBOUND_H
#define KATOBOUND_H

/* Generated by cbindgen from katobound-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum KtbStatus {
  KTB_STATUS_OK = 0,
  KTB_STATUS_NULL_POINTER = 1,
  KTB_STATUS_INVALID_UTF8 = 2,
  KTB_STATUS_PARSE_ERROR = 3,
  KTB_STATUS_INVALID_ARGUMENT = 4,
  // A mathematical precondition failed (inadmissible scale, window
  // ordering, unreachable target, insufficient separation).
  KTB_STATUS_MATH_DOMAIN = 5,
  // Unexpected internal failure.
  KTB_STATUS_INTERNAL = 6,
} KtbStatus;

// Which bound family a norm figure belongs to.
typedef enum KtbNormKind {
  KTB_NORM_KIND_EMPIRICAL = 0,
  KTB_NORM_KIND_ANALYTIC = 1,
  KTB_NORM_KIND_PLUG_IN = 2,
} KtbNormKind;

// Confidence-interval construction for the separation threshold.
typedef enum KtbIntervalMethod {
  KTB_INTERVAL_METHOD_KATO_TEMPLE = 0,
  KTB_INTERVAL_METHOD_WEYL_LU_PENG = 1,
} KtbIntervalMethod;

// Opaque model handle.
typedef struct KtbModel KtbModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; do not free.
const char *ktb_version(void);

// Most recent error message on this thread, or NULL if none. The caller
// owns the returned string and must release it with `ktb_string_free`.
char *ktb_last_error_message(void);

// Releases a string allocated by this library.
//
// # Safety
// `text` must be NULL or a pointer previously returned by a katobound
// function, not yet freed.
void ktb_string_free(char *text);

// Parses a JSON model description into a handle. On success writes the
// handle to `out` and returns OK; the handle must be released with
// `ktb_model_free`.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum KtbStatus ktb_model_parse_json(const char *json, struct KtbModel **out);

// Releases a model handle.
//
// # Safety
// `model` must be NULL or a handle from `ktb_model_parse_json`, not yet
// freed.
void ktb_model_free(struct KtbModel *model);

// Vertex count of a graph model, matrix dimension of the spike model.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum KtbStatus ktb_model_dimension(const struct KtbModel *model, size_t *out);

// Signal values of the model (nonzero eigenvalues of a graph model's
// expectation, singular values of the spike model), ascending. Writes at
// most `capacity` values into `buffer` and stores the total count in
// `written`; call with a NULL buffer (capacity 0) to query the count.
//
// # Safety
// `model` must be a live handle, `written` valid, and `buffer` valid for
// `capacity` writes when non-NULL.
enum KtbStatus ktb_model_signal_values(const struct KtbModel *model,
                                       double *buffer,
                                       size_t capacity,
                                       size_t *written);

// Analytic spectral-norm tail threshold for the model's noise:
// 3 sqrt(n) for adjacency noise, 6 sqrt(q) for the Gaussian spike model.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum KtbStatus ktb_analytic_norm_threshold(const struct KtbModel *model, double *out);

// Deviation bounds for every signal value of the model inside the window
// (alpha, beta), serialized as a JSON array. Pass INFINITY as `beta` for
// a window unbounded above. The noise norm is supplied explicitly as a
// (kind, value) pair; `ktb_analytic_norm_threshold` provides the usual
// analytic value. The returned string must be released with
// `ktb_string_free`.
//
// # Safety
// `model` must be a live handle and `out_json` a valid pointer.
enum KtbStatus ktb_model_bounds_json(const struct KtbModel *model,
                                     double alpha,
                                     double beta,
                                     double t,
                                     enum KtbNormKind norm_kind,
                                     double norm_value,
                                     char **out_json);

// Minimal deviation scale t at which the three-signal unconditional
// probability floor reaches `target_prob` for an n-vertex graph.
//
// # Safety
// `out` must be a valid pointer.
enum KtbStatus ktb_solve_t(double target_prob, size_t d, size_t n, double *out);

// Smallest perturbation at which the three-block null and alternative
// confidence intervals separate (probability 0.99, ceiling 0.2).
//
// # Safety
// `out` must be a valid pointer.
enum KtbStatus ktb_epsilon_n(size_t n,
                             double p,
                             double q,
                             enum KtbIntervalMethod method,
                             double *out);

// Detectability index of a chatter community: below one in the limit, no
// test statistic is consistent.
//
// # Safety
// `out` must be a valid pointer.
enum KtbStatus ktb_detectability_index(size_t n, size_t m, double p, double eps, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KATOBOUND_H */

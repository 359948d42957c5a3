/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef W1KP_H
#define W1KP_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define W1KP_METRIC_EUCLIDEAN 0

#define W1KP_METRIC_SQUARED_EUCLIDEAN 1

#define W1KP_METRIC_COSINE 2

#define W1KP_LEVEL_NONE 0

#define W1KP_LEVEL_LOW 1

#define W1KP_LEVEL_MID 2

#define W1KP_LEVEL_HIGH 3

// Result code of every call. Values 1 to 3 match the CLI exit codes.
typedef enum {
  W1KP_STATUS_OK = 0,
  W1KP_STATUS_IO = 1,
  W1KP_STATUS_VALIDATION = 2,
  W1KP_STATUS_CAPACITY = 3,
  W1KP_STATUS_FORMAT = 4,
  W1KP_STATUS_CALIBRATION = 5,
  W1KP_STATUS_NULL_POINTER = 6,
  W1KP_STATUS_INVALID_UTF8 = 7,
  W1KP_STATUS_PANIC = 8,
} W1kpStatus;

// Fitted CDF handle.
typedef struct W1kpCdf W1kpCdf;

// Embedding set handle.
typedef struct W1kpEmbeddings W1kpEmbeddings;

// Symmetric distance matrix handle, raw or normalized.
typedef struct W1kpMatrix W1kpMatrix;

// A variability score. `k` is 0 for the pairwise-mean kernel; `samples`
// and `seed` are 0 unless `monte_carlo` is set.
typedef struct {
  double eta;
  double w1kp;
  size_t k;
  bool monte_carlo;
  uint64_t samples;
  uint64_t seed;
} W1kpScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or NULL if none.
// The pointer stays valid until the next failing call on the same thread.
const char *w1kp_last_error(void);

// Reads a W1KPEMB1 or CSV embedding file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
W1kpStatus w1kp_embeddings_read(const char *path, W1kpEmbeddings **out);

// Builds a set from `n` ids and an `n * dim` row-major value array.
//
// # Safety
// `ids` must hold `n` NUL-terminated strings and `values` `n * dim` floats.
W1kpStatus w1kp_embeddings_from_rows(const char *const *ids,
                                     const float *values,
                                     size_t n,
                                     size_t dim,
                                     W1kpEmbeddings **out);

// Number of images, or 0 for NULL.
//
// # Safety
// `set` must be NULL or a live handle.
size_t w1kp_embeddings_len(const W1kpEmbeddings *set);

// Embedding dimension, or 0 for NULL.
//
// # Safety
// `set` must be NULL or a live handle.
size_t w1kp_embeddings_dim(const W1kpEmbeddings *set);

// # Safety
// `set` must be NULL or a handle not yet freed.
void w1kp_embeddings_free(W1kpEmbeddings *set);

// Raw distance between two `dim`-length vectors.
//
// # Safety
// `a` and `b` must hold `dim` floats; `out` must be writable.
W1kpStatus w1kp_distance(uint32_t metric_code,
                         const float *a,
                         const float *b,
                         size_t dim,
                         double *out);

// Raw pairwise distance matrix of a set.
//
// # Safety
// `set` must be a live handle; `out` must be writable.
W1kpStatus w1kp_pairwise(const W1kpEmbeddings *set, uint32_t metric_code, W1kpMatrix **out);

// Side length of the matrix, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t w1kp_matrix_size(const W1kpMatrix *m);

// Entry `(i, j)`; the diagonal is 0.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
W1kpStatus w1kp_matrix_get(const W1kpMatrix *m, size_t i, size_t j, double *out);

// # Safety
// `m` must be NULL or a handle not yet freed.
void w1kp_matrix_free(W1kpMatrix *m);

// Fits an empirical CDF to `len` raw distances. `provenance` may be NULL.
//
// # Safety
// `distances` must hold `len` doubles; `out` must be writable.
W1kpStatus w1kp_cdf_fit(const double *distances,
                        size_t len,
                        uint32_t metric_code,
                        const char *provenance,
                        W1kpCdf **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
W1kpStatus w1kp_cdf_load(const char *path, W1kpCdf **out);

// # Safety
// `cdf` must be a live handle; `path` a NUL-terminated string.
W1kpStatus w1kp_cdf_save(const W1kpCdf *cdf, const char *path);

// Fraction of the reference sample `<= x`.
//
// # Safety
// `cdf` must be a live handle; `out` must be writable.
W1kpStatus w1kp_cdf_apply(const W1kpCdf *cdf, double x, double *out);

// Reference sample size, or 0 for NULL.
//
// # Safety
// `cdf` must be NULL or a live handle.
size_t w1kp_cdf_len(const W1kpCdf *cdf);

// Metric code the CDF was fitted for, or `UINT32_MAX` for NULL.
//
// # Safety
// `cdf` must be NULL or a live handle.
uint32_t w1kp_cdf_metric(const W1kpCdf *cdf);

// # Safety
// `cdf` must be NULL or a handle not yet freed.
void w1kp_cdf_free(W1kpCdf *cdf);

// Maps a raw matrix through the CDF into a new normalized matrix.
//
// # Safety
// `raw` and `cdf` must be live handles; `out` must be writable.
W1kpStatus w1kp_normalize(const W1kpMatrix *raw, const W1kpCdf *cdf, W1kpMatrix **out);

// Pairwise-mean score of a normalized matrix.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
W1kpStatus w1kp_eta_mean(const W1kpMatrix *m, W1kpScore *out);

// k-expected-maximum score of a normalized matrix. Subsets are enumerated
// when there are at most `exact_budget` of them and sampled
// `mc_samples` times otherwise, which requires `has_seed`.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
W1kpStatus w1kp_eta_k(const W1kpMatrix *m,
                      size_t k,
                      uint64_t exact_budget,
                      uint64_t mc_samples,
                      bool has_seed,
                      uint64_t seed,
                      W1kpScore *out);

// Similarity level (`W1KP_LEVEL_*`) of `score` under the given cutoffs.
//
// # Safety
// `out` must be writable.
W1kpStatus w1kp_classify(double score,
                         double beta_low,
                         double beta_mid,
                         double beta_high,
                         uint32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* W1KP_H */

/* This file is generated by cbindgen from crates/capi; do not edit by hand. */

#ifndef PRODGRAPH_H
#define PRODGRAPH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
enum PgStatus {
  PG_OK = 0,
  PG_NULL_ARGUMENT = 1,
  PG_INVALID_ARGUMENT = 2,
  PG_IO_ERROR = 3,
  PG_NUMERIC_ERROR = 4,
  PG_UTF8_ERROR = 5,
  PG_BUFFER_TOO_SMALL = 6,
  PG_INTERNAL_ERROR = 7,
};
typedef int32_t PgStatus;

/**
 * Opaque signal batch handle.
 */
typedef struct PgBatch PgBatch;

/**
 * Opaque centrality-result handle.
 */
typedef struct PgCentralityResult PgCentralityResult;

/**
 * Opaque learning-result handle.
 */
typedef struct PgLearnResult PgLearnResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string; never freed.
 */
const char *pg_version(void);

/**
 * Copies the last error message for this thread into `buf` (truncated,
 * always nul-terminated when `cap > 0`). Returns the full message length
 * in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must point to `cap` writable bytes, or be null with `cap == 0`.
 */
size_t pg_last_error_message(char *buf, size_t cap);

/**
 * Reads a signal batch from a CSV file with a `# N=.. M=.. S=..` header.
 *
 * # Safety
 * `path` must be a valid nul-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
PgStatus pg_batch_read_csv(const char *path, struct PgBatch **out);

/**
 * Builds a batch from a row-major `s x (n*m)` buffer; each row is one
 * stacked observation, layer-by-layer.
 *
 * # Safety
 * `data` must point to `s * n * m` doubles; `out` must be valid.
 */
PgStatus pg_batch_from_rows(const double *data,
                            size_t s,
                            size_t n,
                            size_t m,
                            struct PgBatch **out);

/**
 * Releases a batch handle. Null is ignored.
 *
 * # Safety
 * `batch` must be a handle from this library, not yet freed.
 */
void pg_batch_free(struct PgBatch *batch);

/**
 * Reports the dimensions `(s, n, m)` of a batch.
 *
 * # Safety
 * `batch` must be a live handle; output pointers may be null to skip.
 */
PgStatus pg_batch_dims(const struct PgBatch *batch, size_t *s, size_t *n, size_t *m);

/**
 * Learns both factor adjacency matrices from a batch.
 *
 * `method`: 0 = nearest-Kronecker decomposition, 1 = unfolding.
 * Defaults apply when `rho`, `eps` or `thr_frac` are not positive.
 *
 * # Safety
 * `batch` must be a live handle; `out` must be valid.
 */
PgStatus pg_learn(const struct PgBatch *batch,
                  double gamma1,
                  int method,
                  double rho,
                  double eps,
                  double thr_frac,
                  struct PgLearnResult **out);

/**
 * Releases a learning result. Null is ignored.
 *
 * # Safety
 * `r` must be a handle from `pg_learn`, not yet freed.
 */
void pg_learn_result_free(struct PgLearnResult *r);

/**
 * Reports `(n, m)` for a learning result.
 *
 * # Safety
 * `r` must be a live handle; output pointers may be null to skip.
 */
PgStatus pg_learn_result_dims(const struct PgLearnResult *r, size_t *n, size_t *m);

/**
 * Copies the learned `m x m` coupling adjacency, row-major.
 *
 * # Safety
 * `r` must be live; `buf` must hold at least `len` doubles.
 */
PgStatus pg_learn_result_coupling(const struct PgLearnResult *r, double *buf, size_t len);

/**
 * Copies the learned `n x n` physical adjacency, row-major.
 *
 * # Safety
 * `r` must be live; `buf` must hold at least `len` doubles.
 */
PgStatus pg_learn_result_physical(const struct PgLearnResult *r, double *buf, size_t len);

/**
 * Copies the `(n*m) x (n*m)` 0/1 support of the reassembled interaction
 * graph, row-major.
 *
 * # Safety
 * `r` must be live; `buf` must hold at least `len` doubles.
 */
PgStatus pg_learn_result_interaction_support(const struct PgLearnResult *r,
                                             double *buf,
                                             size_t len);

/**
 * Reports solver objectives and convergence for a learning result.
 *
 * # Safety
 * `r` must be live; output pointers may be null to skip.
 */
PgStatus pg_learn_result_stats(const struct PgLearnResult *r,
                               double *coupling_objective,
                               double *physical_objective,
                               int *converged);

/**
 * Detects the top-k central physical nodes from a batch.
 *
 * `method`: 0 = nearest-Kronecker decomposition, 1 = unfolding.
 *
 * # Safety
 * `batch` must be a live handle; `out` must be valid.
 */
PgStatus pg_centrality(const struct PgBatch *batch,
                       int method,
                       size_t k,
                       struct PgCentralityResult **out);

/**
 * Releases a centrality result. Null is ignored.
 *
 * # Safety
 * `r` must be a handle from `pg_centrality`, not yet freed.
 */
void pg_centrality_result_free(struct PgCentralityResult *r);

/**
 * Copies the 0-based indices of the detected nodes (ascending).
 *
 * # Safety
 * `r` must be live; `buf` must hold at least `len` entries.
 */
PgStatus pg_centrality_result_top_nodes(const struct PgCentralityResult *r,
                                        size_t *buf,
                                        size_t len);

/**
 * Copies the unit physical centrality vector (length `n`).
 *
 * # Safety
 * `r` must be live; `buf` must hold at least `len` doubles.
 */
PgStatus pg_centrality_result_vector(const struct PgCentralityResult *r,
                                     double *buf,
                                     size_t len);

/**
 * Reports the selected eigenvector index and its positivity score.
 *
 * # Safety
 * `r` must be live; output pointers may be null to skip.
 */
PgStatus pg_centrality_result_selected(const struct PgCentralityResult *r,
                                       size_t *index,
                                       double *pos_score);

#ifdef __cplusplus
}  // extern "C"
#endif // __cplusplus

#endif  /* PRODGRAPH_H */

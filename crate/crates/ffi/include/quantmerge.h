#ifndef QUANTMERGE_H
#define QUANTMERGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum QmStatus {
  QM_STATUS_OK = 0,
  QM_STATUS_NULL_POINTER = 1,
  QM_STATUS_INVALID_ARGUMENT = 2,
  QM_STATUS_IO = 3,
  QM_STATUS_PARSE = 4,
  QM_STATUS_FEATURE_MISMATCH = 5,
  QM_STATUS_UNDEFINED_SKILL = 6,
  QM_STATUS_PANIC = 7,
} QmStatus;

/*
 A fitted boosted-tree model for one quantile level.
 */
typedef struct QmGbdt QmGbdt;

/*
 A fitted quantile regression forest.
 */
typedef struct QmQrf QmQrf;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; empty after a success. The
 pointer stays valid until the next call on the same thread.
 */
const char *qm_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *qm_version(void);

/*
 Pinball loss of the residual `u` at level `tau`.

 # Safety
 `out` must be a valid pointer to a double.
 */
enum QmStatus qm_pinball_loss(double u, double tau, double *out);

/*
 Mean quantile score of `n` predictions.

 # Safety
 `predictions` and `observations` must point to `n` doubles and `out` to one.
 */
enum QmStatus qm_mean_quantile_score(const double *predictions,
                                     const double *observations,
                                     size_t n,
                                     double tau,
                                     double *out);

/*
 Absolute gap between the empirical exceedance frequency and `tau`.

 # Safety
 `predictions` and `observations` must point to `n` doubles and `out` to one.
 */
enum QmStatus qm_frequency_score(const double *predictions,
                                 const double *observations,
                                 size_t n,
                                 double tau,
                                 double *out);

/*
 `1 - candidate / reference`; `QM_STATUS_UNDEFINED_SKILL` when the
 reference is zero.

 # Safety
 `out` must be a valid pointer to a double.
 */
enum QmStatus qm_quantile_skill_score(double candidate, double reference, double *out);

/*
 Loads a boosted-tree model file.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QmStatus qm_gbdt_load(const char *path, struct QmGbdt **out);

/*
 Number of predictors the model expects.

 # Safety
 `model` must come from [`qm_gbdt_load`].
 */
enum QmStatus qm_gbdt_n_features(const struct QmGbdt *model, size_t *out);

/*
 Predicts `n_rows` rows of the row-major matrix `x` into `out`.

 # Safety
 `x` must hold `n_rows * n_cols` doubles and `out` room for `n_rows`.
 */
enum QmStatus qm_gbdt_predict(const struct QmGbdt *model,
                              const double *x,
                              size_t n_rows,
                              size_t n_cols,
                              double *out);

/*
 Releases a model; null is ignored.

 # Safety
 `model` must come from [`qm_gbdt_load`] and not be used afterwards.
 */
void qm_gbdt_free(struct QmGbdt *model);

/*
 Loads a forest model file.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QmStatus qm_qrf_load(const char *path, struct QmQrf **out);

/*
 Number of predictors the model expects.

 # Safety
 `model` must come from [`qm_qrf_load`].
 */
enum QmStatus qm_qrf_n_features(const struct QmQrf *model, size_t *out);

/*
 Predicts `n_taus` quantiles for each row of `x`. `out` is row-major,
 `n_rows * n_taus` values.

 # Safety
 `x` must hold `n_rows * n_cols` doubles, `taus` `n_taus` doubles and
 `out` room for `n_rows * n_taus`.
 */
enum QmStatus qm_qrf_predict(const struct QmQrf *model,
                             const double *x,
                             size_t n_rows,
                             size_t n_cols,
                             const double *taus,
                             size_t n_taus,
                             double *out);

/*
 Releases a model; null is ignored.

 # Safety
 `model` must come from [`qm_qrf_load`] and not be used afterwards.
 */
void qm_qrf_free(struct QmQrf *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUANTMERGE_H */

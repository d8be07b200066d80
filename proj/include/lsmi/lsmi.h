/* Copyright 2026 The LSMI-Sinkhorn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the semi-supervised SMI estimator.
 *
 * Every function returns an lsmi_status. On failure the message is available
 * from lsmi_last_error() on the calling thread until the next failing call.
 * Handles are opaque, owned by the caller and released with the matching
 * *_free function; passing NULL to a *_free function is a no-op.
 *
 * Matrices cross the boundary as row-major double arrays, one sample per row.
 * Index pairs cross as int64_t arrays of length 2 * count, laid out
 * (x0, y0, x1, y1, ...), and capacities of such buffers count pairs.
 * Output buffers are sized by the caller; a buffer
 * that is too small yields LSMI_ERR_INPUT and the required length is still
 * written to the length out-parameter.
 */

#ifndef LSMI_LSMI_H_
#define LSMI_LSMI_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(LSMI_BUILDING_LIBRARY)
#define LSMI_API __declspec(dllexport)
#else
#define LSMI_API __declspec(dllimport)
#endif
#else
#define LSMI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsmi_status {
  LSMI_OK = 0,
  LSMI_ERR_INTERNAL = 1,
  LSMI_ERR_INPUT = 2,
  LSMI_ERR_NUMERICAL = 3
} lsmi_status;

typedef enum lsmi_part {
  LSMI_PAIRED_X = 0,
  LSMI_PAIRED_Y = 1,
  LSMI_UNPAIRED_X = 2,
  LSMI_UNPAIRED_Y = 3
} lsmi_part;

typedef enum lsmi_assign_method {
  LSMI_ASSIGN_GREEDY = 0,
  LSMI_ASSIGN_OPTIMAL = 1
} lsmi_assign_method;

typedef struct lsmi_table lsmi_table;
typedef struct lsmi_dataset lsmi_dataset;
typedef struct lsmi_fit lsmi_fit;
typedef struct lsmi_cv_report lsmi_cv_report;
typedef struct lsmi_layout lsmi_layout;

typedef struct lsmi_config {
  int64_t b;
  double epsilon;
  double lambda;
  double beta;
  int64_t max_outer_iters;
  double eta;
  uint64_t seed;
  int64_t sinkhorn_max_iters;
  double sinkhorn_tol;
} lsmi_config;

typedef struct lsmi_synthetic_spec {
  const char* kind; /* "random", "linear", "nonlinear" or "pca" */
  int64_t n;
  int64_t n_x;
  int64_t n_y;
  int64_t dim;     /* 0 selects the kind's default */
  double noise_sd; /* negative selects the kind's default */
  uint64_t seed;
  int shared_unpaired_draws;
} lsmi_synthetic_spec;

typedef struct lsmi_timing {
  double alpha_seconds;
  double cost_seconds;
  double sinkhorn_seconds;
  double h_seconds;
  int64_t sinkhorn_iterations;
} lsmi_timing;

typedef struct lsmi_fit_summary {
  int64_t iterations_run;
  int converged;
  int64_t sinkhorn_warnings;
  int64_t plan_rows;
  int64_t plan_cols;
  int64_t basis_size;
  double setup_seconds;
  double max_marginal_violation;
} lsmi_fit_summary;

typedef struct lsmi_cv_score {
  double lambda;
  double beta;
  double score;
} lsmi_cv_score;

LSMI_API const char* lsmi_version(void);
LSMI_API const char* lsmi_last_error(void);

LSMI_API void lsmi_config_default(lsmi_config* config);
LSMI_API void lsmi_synthetic_default(lsmi_synthetic_spec* spec);

/* Tables */
LSMI_API lsmi_status lsmi_table_create(const double* data, int64_t rows,
                                       int64_t cols, lsmi_table** out);
LSMI_API lsmi_status lsmi_table_read(const char* path, lsmi_table** out);
LSMI_API lsmi_status lsmi_table_write(const lsmi_table* table, const char* path);
LSMI_API lsmi_status lsmi_table_shape(const lsmi_table* table, int64_t* rows,
                                      int64_t* cols);
LSMI_API lsmi_status lsmi_table_data(const lsmi_table* table, double* out,
                                     size_t capacity);
/* Reads a two-column index file such as an anchor list. */
LSMI_API lsmi_status lsmi_index_pairs_read(const char* path, int64_t* out,
                                           size_t capacity, size_t* count);
LSMI_API void lsmi_table_free(lsmi_table* table);

/* Splits columns into two views; x_columns and y_columns receive the source
 * column indices and must hold cols entries each. */
LSMI_API lsmi_status lsmi_split_features(const lsmi_table* table, int64_t d_x,
                                         lsmi_table** x, lsmi_table** y,
                                         int64_t* x_columns, int64_t* y_columns,
                                         size_t capacity, size_t* warnings);

/* Datasets */
LSMI_API lsmi_status lsmi_dataset_generate(const lsmi_synthetic_spec* spec,
                                           lsmi_dataset** out);
/* unpaired_x and unpaired_y may both be NULL. */
LSMI_API lsmi_status lsmi_dataset_from_tables(const lsmi_table* paired_x,
                                              const lsmi_table* paired_y,
                                              const lsmi_table* unpaired_x,
                                              const lsmi_table* unpaired_y,
                                              lsmi_dataset** out);
LSMI_API lsmi_status lsmi_dataset_from_pairs(const lsmi_table* x,
                                             const lsmi_table* y,
                                             const int64_t* pairs, size_t count,
                                             lsmi_dataset** out);
LSMI_API lsmi_status lsmi_dataset_semi_supervised(const lsmi_table* x,
                                                  const lsmi_table* y, int64_t n,
                                                  int64_t n_x, int64_t n_y,
                                                  uint64_t seed,
                                                  lsmi_dataset** out);
LSMI_API lsmi_status lsmi_dataset_counts(const lsmi_dataset* data, int64_t* n,
                                         int64_t* n_x, int64_t* n_y,
                                         int64_t* dim_x, int64_t* dim_y);
LSMI_API lsmi_status lsmi_dataset_part(const lsmi_dataset* data, lsmi_part part,
                                       lsmi_table** out);
/* Source row of every sample of a part; only for datasets built from tables
 * by row selection. */
LSMI_API lsmi_status lsmi_dataset_source_rows(const lsmi_dataset* data,
                                              lsmi_part part, int64_t* out,
                                              size_t capacity, size_t* count);
LSMI_API void lsmi_dataset_free(lsmi_dataset* data);

/* Fitting */
LSMI_API lsmi_status lsmi_fit_run(const lsmi_dataset* data,
                                  const lsmi_config* config, lsmi_fit** out);
LSMI_API lsmi_status lsmi_fit_get_summary(const lsmi_fit* fit,
                                          lsmi_fit_summary* out);
LSMI_API lsmi_status lsmi_fit_trace(const lsmi_fit* fit, double* out,
                                    size_t capacity, size_t* count);
LSMI_API lsmi_status lsmi_fit_timings(const lsmi_fit* fit, lsmi_timing* out,
                                      size_t capacity, size_t* count);
LSMI_API lsmi_status lsmi_fit_plan(const lsmi_fit* fit, double* out,
                                   size_t capacity);
LSMI_API lsmi_status lsmi_fit_alpha(const lsmi_fit* fit, double* out,
                                    size_t capacity, size_t* count);
LSMI_API lsmi_status lsmi_fit_smi(const lsmi_fit* fit, const lsmi_dataset* data,
                                  double* out);
LSMI_API lsmi_status lsmi_fit_smi_paired(const lsmi_fit* fit,
                                         const lsmi_dataset* data, double beta,
                                         double* out);
/* Ratio values r(x_i, y_i) for the rows of two equally long tables. */
LSMI_API lsmi_status lsmi_fit_evaluate(const lsmi_fit* fit, const lsmi_table* x,
                                       const lsmi_table* y, double* out,
                                       size_t capacity);
LSMI_API lsmi_status lsmi_fit_assign(const lsmi_fit* fit,
                                     lsmi_assign_method method, int64_t* pairs,
                                     size_t capacity, size_t* count);
LSMI_API lsmi_status lsmi_fit_topk(const lsmi_fit* fit, const int64_t* truth,
                                   size_t count, size_t k, double* out);
LSMI_API void lsmi_fit_free(lsmi_fit* fit);

/* Model selection. NULL grids select the default grids. */
LSMI_API lsmi_status lsmi_cross_validate(const lsmi_dataset* data,
                                         const lsmi_config* config,
                                         const double* lambdas, size_t n_lambdas,
                                         const double* betas, size_t n_betas,
                                         double holdout_fraction, uint64_t seed,
                                         lsmi_cv_report** out);
LSMI_API lsmi_status lsmi_cv_best(const lsmi_cv_report* report, double* lambda,
                                  double* beta, double* score);
LSMI_API lsmi_status lsmi_cv_scores(const lsmi_cv_report* report,
                                    lsmi_cv_score* out, size_t capacity,
                                    size_t* count);
LSMI_API void lsmi_cv_report_free(lsmi_cv_report* report);

/* Grid layouts */
LSMI_API lsmi_status lsmi_grid_positions(int64_t rows, int64_t cols,
                                         lsmi_table** out);
LSMI_API lsmi_status lsmi_mask_positions(const char* mask, lsmi_table** out);
LSMI_API lsmi_status lsmi_summarize(const lsmi_table* features,
                                    const lsmi_table* positions,
                                    const int64_t* anchors, size_t n_anchors,
                                    const lsmi_config* config,
                                    lsmi_layout** out);
/* The sample set a summarize call fits: anchors paired, the rest unpaired,
 * with source rows mapping back to items and positions. */
LSMI_API lsmi_status lsmi_summarize_dataset(const lsmi_table* features,
                                            const lsmi_table* positions,
                                            const int64_t* anchors,
                                            size_t n_anchors, lsmi_dataset** out);
LSMI_API lsmi_status lsmi_layout_counts(const lsmi_layout* layout,
                                        size_t* placed, size_t* unplaced,
                                        size_t* empty);
/* (item, position) pairs sorted by position. */
LSMI_API lsmi_status lsmi_layout_placements(const lsmi_layout* layout,
                                            int64_t* pairs, size_t capacity);
LSMI_API lsmi_status lsmi_layout_unplaced(const lsmi_layout* layout,
                                          int64_t* items, size_t capacity);
LSMI_API lsmi_status lsmi_layout_empty(const lsmi_layout* layout,
                                       int64_t* positions, size_t capacity);
LSMI_API void lsmi_layout_free(lsmi_layout* layout);

#ifdef __cplusplus
}
#endif

#endif /* LSMI_LSMI_H_ */

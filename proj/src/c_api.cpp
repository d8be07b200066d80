// Copyright 2026 The LSMI-Sinkhorn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsmi/lsmi.h"

#include <algorithm>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "lsmi/data.hpp"
#include "lsmi/estimator.hpp"
#include "lsmi/matching.hpp"
#include "lsmi/model_selection.hpp"

struct lsmi_table {
  lsmi::SampleMatrix values;
};

struct lsmi_dataset {
  lsmi::SampleSet data;
  // Source rows per part; empty when the dataset did not come from tables.
  std::vector<lsmi::Index> rows[4];
};

struct lsmi_fit {
  lsmi::FitResult result;
};

struct lsmi_cv_report {
  lsmi::CvReport report;
};

struct lsmi_layout {
  lsmi::Layout layout;
};

namespace {

thread_local std::string g_last_error;

lsmi_status fail(lsmi_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body and maps exceptions to status codes.
template <typename Fn>
lsmi_status guarded(Fn&& body) {
  try {
    body();
    return LSMI_OK;
  } catch (const lsmi::Error& e) {
    return fail(e.kind() == lsmi::ErrorKind::kNumerical ? LSMI_ERR_NUMERICAL
                                                         : LSMI_ERR_INPUT,
                e.what());
  } catch (const std::bad_alloc&) {
    return fail(LSMI_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LSMI_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LSMI_ERR_INTERNAL, "unknown error");
  }
}

template <typename T>
void require(const T* ptr, const char* what) {
  if (ptr == nullptr) lsmi::throw_input(std::string("null argument: ") + what);
}

void require_capacity(std::size_t needed, std::size_t capacity, const char* what) {
  if (capacity < needed) {
    lsmi::throw_input(std::string("buffer too small for ") + what + ": need " +
                      std::to_string(needed));
  }
}

lsmi::EstimatorConfig to_config(const lsmi_config* c) {
  lsmi::EstimatorConfig out;
  if (c == nullptr) return out;
  if (c->b < 1 || c->max_outer_iters < 1 || c->sinkhorn_max_iters < 1) {
    lsmi::throw_input("config counts must be positive");
  }
  out.b = c->b;
  out.epsilon = c->epsilon;
  out.lambda = c->lambda;
  out.beta = c->beta;
  out.max_outer_iters = static_cast<std::size_t>(c->max_outer_iters);
  out.eta = c->eta;
  out.seed = c->seed;
  out.sinkhorn_max_iters = static_cast<std::size_t>(c->sinkhorn_max_iters);
  out.sinkhorn_tol = c->sinkhorn_tol;
  out.validate();
  return out;
}

void write_row_major(const lsmi::Matrix& m, double* out) {
  for (lsmi::Index r = 0; r < m.rows(); ++r) {
    for (lsmi::Index c = 0; c < m.cols(); ++c) *out++ = m(r, c);
  }
}

std::vector<lsmi::IndexPair> read_pairs(const int64_t* pairs, std::size_t count) {
  if (count > 0) require(pairs, "pairs");
  std::vector<lsmi::IndexPair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.emplace_back(pairs[2 * k], pairs[2 * k + 1]);
  }
  return out;
}

void write_pairs(const std::vector<lsmi::IndexPair>& pairs, int64_t* out) {
  for (const auto& [a, b] : pairs) {
    *out++ = a;
    *out++ = b;
  }
}

const lsmi::SampleMatrix& part_of(const lsmi::SampleSet& d, lsmi_part part) {
  switch (part) {
    case LSMI_PAIRED_X: return d.paired_x;
    case LSMI_PAIRED_Y: return d.paired_y;
    case LSMI_UNPAIRED_X: return d.unpaired_x;
    case LSMI_UNPAIRED_Y: return d.unpaired_y;
  }
  lsmi::throw_input("unknown dataset part");
}

lsmi_dataset* wrap_indexed(lsmi::IndexedSampleSet&& indexed) {
  auto* ds = new lsmi_dataset{std::move(indexed.data), {}};
  ds->rows[LSMI_PAIRED_X] = std::move(indexed.paired_rows);
  ds->rows[LSMI_PAIRED_Y] = std::move(indexed.paired_y_rows);
  ds->rows[LSMI_UNPAIRED_X] = std::move(indexed.x_rows);
  ds->rows[LSMI_UNPAIRED_Y] = std::move(indexed.y_rows);
  return ds;
}

}  // namespace

extern "C" {

const char* lsmi_version(void) { return "1.0.0"; }

const char* lsmi_last_error(void) { return g_last_error.c_str(); }

void lsmi_config_default(lsmi_config* config) {
  if (config == nullptr) return;
  const lsmi::EstimatorConfig d;
  config->b = d.b;
  config->epsilon = d.epsilon;
  config->lambda = d.lambda;
  config->beta = d.beta;
  config->max_outer_iters = static_cast<int64_t>(d.max_outer_iters);
  config->eta = d.eta;
  config->seed = d.seed;
  config->sinkhorn_max_iters = static_cast<int64_t>(d.sinkhorn_max_iters);
  config->sinkhorn_tol = d.sinkhorn_tol;
}

void lsmi_synthetic_default(lsmi_synthetic_spec* spec) {
  if (spec == nullptr) return;
  const lsmi::SyntheticSpec d;
  spec->kind = "linear";
  spec->n = d.n;
  spec->n_x = d.n_x;
  spec->n_y = d.n_y;
  spec->dim = 0;
  spec->noise_sd = -1.0;
  spec->seed = 0;
  spec->shared_unpaired_draws = 0;
}

lsmi_status lsmi_table_create(const double* data, int64_t rows, int64_t cols,
                              lsmi_table** out) {
  return guarded([&] {
    require(out, "out");
    if (rows < 0 || cols < 0) lsmi::throw_input("negative table shape");
    if (rows * cols > 0) require(data, "data");
    auto table = std::make_unique<lsmi_table>();
    table->values.resize(rows, cols);
    for (int64_t r = 0; r < rows; ++r) {
      for (int64_t c = 0; c < cols; ++c) table->values(r, c) = data[r * cols + c];
    }
    *out = table.release();
  });
}

lsmi_status lsmi_table_read(const char* path, lsmi_table** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new lsmi_table{lsmi::read_table(path).values};
  });
}

lsmi_status lsmi_table_write(const lsmi_table* table, const char* path) {
  return guarded([&] {
    require(table, "table");
    require(path, "path");
    std::ofstream file(path);
    if (!file) lsmi::throw_input(std::string("cannot write ") + path);
    lsmi::write_table(file, table->values);
    if (!file) lsmi::throw_input(std::string("write failed: ") + path);
  });
}

lsmi_status lsmi_table_shape(const lsmi_table* table, int64_t* rows, int64_t* cols) {
  return guarded([&] {
    require(table, "table");
    if (rows) *rows = table->values.rows();
    if (cols) *cols = table->values.cols();
  });
}

lsmi_status lsmi_table_data(const lsmi_table* table, double* out, size_t capacity) {
  return guarded([&] {
    require(table, "table");
    const auto needed = static_cast<std::size_t>(table->values.size());
    require_capacity(needed, capacity, "table data");
    if (needed > 0) require(out, "out");
    write_row_major(table->values, out);
  });
}

lsmi_status lsmi_index_pairs_read(const char* path, int64_t* out, size_t capacity,
                                  size_t* count) {
  return guarded([&] {
    require(path, "path");
    require(count, "count");
    const auto pairs = lsmi::read_index_pairs(path);
    *count = pairs.size();
    require_capacity(pairs.size(), capacity, "index pairs");
    if (!pairs.empty()) require(out, "out");
    write_pairs(pairs, out);
  });
}

void lsmi_table_free(lsmi_table* table) { delete table; }

lsmi_status lsmi_split_features(const lsmi_table* table, int64_t d_x, lsmi_table** x,
                                lsmi_table** y, int64_t* x_columns,
                                int64_t* y_columns, size_t capacity,
                                size_t* warnings) {
  return guarded([&] {
    require(table, "table");
    require(x, "x");
    require(y, "y");
    lsmi::FeatureSplit split = lsmi::split_features(table->values, d_x);
    if (x_columns || y_columns) {
      require_capacity(static_cast<std::size_t>(table->values.cols()), capacity,
                       "column indices");
    }
    if (x_columns) std::copy(split.x_columns.begin(), split.x_columns.end(), x_columns);
    if (y_columns) std::copy(split.y_columns.begin(), split.y_columns.end(), y_columns);
    if (warnings) *warnings = split.warnings.size();
    auto xt = std::make_unique<lsmi_table>(lsmi_table{std::move(split.x)});
    auto yt = std::make_unique<lsmi_table>(lsmi_table{std::move(split.y)});
    *x = xt.release();
    *y = yt.release();
  });
}

lsmi_status lsmi_dataset_generate(const lsmi_synthetic_spec* spec, lsmi_dataset** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    require(spec->kind, "kind");
    lsmi::SyntheticSpec s;
    s.kind = lsmi::parse_synthetic_kind(spec->kind);
    s.n = spec->n;
    s.n_x = spec->n_x;
    s.n_y = spec->n_y;
    s.dim = spec->dim;
    if (spec->noise_sd >= 0.0) s.noise_sd = spec->noise_sd;
    s.seed = spec->seed;
    s.shared_unpaired_draws = spec->shared_unpaired_draws != 0;
    *out = new lsmi_dataset{lsmi::generate(s), {}};
  });
}

lsmi_status lsmi_dataset_from_tables(const lsmi_table* paired_x,
                                     const lsmi_table* paired_y,
                                     const lsmi_table* unpaired_x,
                                     const lsmi_table* unpaired_y,
                                     lsmi_dataset** out) {
  return guarded([&] {
    require(paired_x, "paired_x");
    require(paired_y, "paired_y");
    require(out, "out");
    if ((unpaired_x == nullptr) != (unpaired_y == nullptr)) {
      lsmi::throw_input("give both unpaired tables or neither");
    }
    lsmi::SampleSet data;
    data.paired_x = paired_x->values;
    data.paired_y = paired_y->values;
    if (unpaired_x) {
      data.unpaired_x = unpaired_x->values;
      data.unpaired_y = unpaired_y->values;
    } else {
      data.unpaired_x.resize(0, data.paired_x.cols());
      data.unpaired_y.resize(0, data.paired_y.cols());
    }
    data.validate();
    *out = new lsmi_dataset{std::move(data), {}};
  });
}

lsmi_status lsmi_dataset_from_pairs(const lsmi_table* x, const lsmi_table* y,
                                    const int64_t* pairs, size_t count,
                                    lsmi_dataset** out) {
  return guarded([&] {
    require(x, "x");
    require(y, "y");
    require(out, "out");
    *out = wrap_indexed(lsmi::from_index_pairs(x->values, y->values,
                                               read_pairs(pairs, count)));
  });
}

lsmi_status lsmi_dataset_semi_supervised(const lsmi_table* x, const lsmi_table* y,
                                         int64_t n, int64_t n_x, int64_t n_y,
                                         uint64_t seed, lsmi_dataset** out) {
  return guarded([&] {
    require(x, "x");
    require(y, "y");
    require(out, "out");
    *out = wrap_indexed(
        lsmi::make_semi_supervised(x->values, y->values, n, n_x, n_y, seed));
  });
}

lsmi_status lsmi_dataset_counts(const lsmi_dataset* data, int64_t* n, int64_t* n_x,
                                int64_t* n_y, int64_t* dim_x, int64_t* dim_y) {
  return guarded([&] {
    require(data, "data");
    if (n) *n = data->data.n();
    if (n_x) *n_x = data->data.n_x();
    if (n_y) *n_y = data->data.n_y();
    if (dim_x) *dim_x = data->data.dim_x();
    if (dim_y) *dim_y = data->data.dim_y();
  });
}

lsmi_status lsmi_dataset_part(const lsmi_dataset* data, lsmi_part part,
                              lsmi_table** out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    *out = new lsmi_table{part_of(data->data, part)};
  });
}

lsmi_status lsmi_dataset_source_rows(const lsmi_dataset* data, lsmi_part part,
                                     int64_t* out, size_t capacity, size_t* count) {
  return guarded([&] {
    require(data, "data");
    require(count, "count");
    const lsmi::Index rows = part_of(data->data, part).rows();
    const auto& src = data->rows[part];
    if (static_cast<lsmi::Index>(src.size()) != rows) {
      lsmi::throw_input("dataset has no source row map");
    }
    *count = src.size();
    require_capacity(src.size(), capacity, "source rows");
    if (!src.empty()) require(out, "out");
    std::copy(src.begin(), src.end(), out);
  });
}

void lsmi_dataset_free(lsmi_dataset* data) { delete data; }

lsmi_status lsmi_fit_run(const lsmi_dataset* data, const lsmi_config* config,
                         lsmi_fit** out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    *out = new lsmi_fit{lsmi::fit(data->data, to_config(config))};
  });
}

lsmi_status lsmi_fit_get_summary(const lsmi_fit* fit, lsmi_fit_summary* out) {
  return guarded([&] {
    require(fit, "fit");
    require(out, "out");
    const auto& r = fit->result;
    out->iterations_run = static_cast<int64_t>(r.iterations_run);
    out->converged = r.converged ? 1 : 0;
    out->sinkhorn_warnings = static_cast<int64_t>(r.sinkhorn_warnings);
    out->plan_rows = r.plan.rows();
    out->plan_cols = r.plan.cols();
    out->basis_size = r.model.alpha.size();
    out->setup_seconds = r.setup_seconds;
    out->max_marginal_violation = r.plan.max_marginal_violation();
  });
}

lsmi_status lsmi_fit_trace(const lsmi_fit* fit, double* out, size_t capacity,
                           size_t* count) {
  return guarded([&] {
    require(fit, "fit");
    require(count, "count");
    const auto& trace = fit->result.objective_trace;
    *count = trace.size();
    require_capacity(trace.size(), capacity, "objective trace");
    if (!trace.empty()) require(out, "out");
    std::copy(trace.begin(), trace.end(), out);
  });
}

lsmi_status lsmi_fit_timings(const lsmi_fit* fit, lsmi_timing* out, size_t capacity,
                             size_t* count) {
  return guarded([&] {
    require(fit, "fit");
    require(count, "count");
    const auto& timings = fit->result.timings;
    *count = timings.size();
    require_capacity(timings.size(), capacity, "timings");
    if (!timings.empty()) require(out, "out");
    for (const auto& t : timings) {
      *out++ = lsmi_timing{t.alpha_seconds, t.cost_seconds, t.sinkhorn_seconds,
                           t.h_seconds, static_cast<int64_t>(t.sinkhorn_iterations)};
    }
  });
}

lsmi_status lsmi_fit_plan(const lsmi_fit* fit, double* out, size_t capacity) {
  return guarded([&] {
    require(fit, "fit");
    const auto& pi = fit->result.plan.pi();
    require_capacity(static_cast<std::size_t>(pi.size()), capacity, "plan");
    if (pi.size() > 0) require(out, "out");
    write_row_major(pi, out);
  });
}

lsmi_status lsmi_fit_alpha(const lsmi_fit* fit, double* out, size_t capacity,
                           size_t* count) {
  return guarded([&] {
    require(fit, "fit");
    require(count, "count");
    const auto& a = fit->result.model.alpha;
    *count = static_cast<std::size_t>(a.size());
    require_capacity(*count, capacity, "alpha");
    if (a.size() > 0) require(out, "out");
    std::copy(a.data(), a.data() + a.size(), out);
  });
}

lsmi_status lsmi_fit_smi(const lsmi_fit* fit, const lsmi_dataset* data, double* out) {
  return guarded([&] {
    require(fit, "fit");
    require(data, "data");
    require(out, "out");
    *out = lsmi::smi_estimate(fit->result.model, data->data);
  });
}

lsmi_status lsmi_fit_smi_paired(const lsmi_fit* fit, const lsmi_dataset* data,
                                double beta, double* out) {
  return guarded([&] {
    require(fit, "fit");
    require(data, "data");
    require(out, "out");
    *out = lsmi::smi_estimate_paired(fit->result.model, fit->result.plan, data->data,
                                     beta);
  });
}

lsmi_status lsmi_fit_evaluate(const lsmi_fit* fit, const lsmi_table* x,
                              const lsmi_table* y, double* out, size_t capacity) {
  return guarded([&] {
    require(fit, "fit");
    require(x, "x");
    require(y, "y");
    const lsmi::Vector r = fit->result.model.evaluate_pairs(x->values, y->values);
    require_capacity(static_cast<std::size_t>(r.size()), capacity, "ratio values");
    if (r.size() > 0) require(out, "out");
    std::copy(r.data(), r.data() + r.size(), out);
  });
}

lsmi_status lsmi_fit_assign(const lsmi_fit* fit, lsmi_assign_method method,
                            int64_t* pairs, size_t capacity, size_t* count) {
  return guarded([&] {
    require(fit, "fit");
    require(count, "count");
    if (method != LSMI_ASSIGN_GREEDY && method != LSMI_ASSIGN_OPTIMAL) {
      lsmi::throw_input("unknown assignment method");
    }
    const auto assignment = lsmi::plan_to_assignment(
        fit->result.plan, method == LSMI_ASSIGN_GREEDY ? lsmi::AssignMethod::kGreedy
                                                       : lsmi::AssignMethod::kOptimal);
    *count = assignment.pairs.size();
    require_capacity(assignment.pairs.size(), capacity, "assignment");
    if (!assignment.pairs.empty()) require(pairs, "pairs");
    write_pairs(assignment.pairs, pairs);
  });
}

lsmi_status lsmi_fit_topk(const lsmi_fit* fit, const int64_t* truth, size_t count,
                          size_t k, double* out) {
  return guarded([&] {
    require(fit, "fit");
    require(out, "out");
    *out = lsmi::topk_accuracy(fit->result.plan, read_pairs(truth, count), k);
  });
}

void lsmi_fit_free(lsmi_fit* fit) { delete fit; }

lsmi_status lsmi_cross_validate(const lsmi_dataset* data, const lsmi_config* config,
                                const double* lambdas, size_t n_lambdas,
                                const double* betas, size_t n_betas,
                                double holdout_fraction, uint64_t seed,
                                lsmi_cv_report** out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    lsmi::CvGrid grid;
    if (lambdas) grid.lambdas.assign(lambdas, lambdas + n_lambdas);
    if (betas) grid.betas.assign(betas, betas + n_betas);
    grid.holdout_fraction = holdout_fraction;
    grid.seed = seed;
    *out = new lsmi_cv_report{lsmi::cross_validate(data->data, to_config(config), grid)};
  });
}

lsmi_status lsmi_cv_best(const lsmi_cv_report* report, double* lambda, double* beta,
                         double* score) {
  return guarded([&] {
    require(report, "report");
    if (lambda) *lambda = report->report.best_lambda;
    if (beta) *beta = report->report.best_beta;
    if (score) *score = report->report.best_score;
  });
}

lsmi_status lsmi_cv_scores(const lsmi_cv_report* report, lsmi_cv_score* out,
                           size_t capacity, size_t* count) {
  return guarded([&] {
    require(report, "report");
    require(count, "count");
    const auto& scores = report->report.scores;
    *count = scores.size();
    require_capacity(scores.size(), capacity, "CV scores");
    if (!scores.empty()) require(out, "out");
    for (const auto& s : scores) *out++ = lsmi_cv_score{s.lambda, s.beta, s.score};
  });
}

void lsmi_cv_report_free(lsmi_cv_report* report) { delete report; }

lsmi_status lsmi_grid_positions(int64_t rows, int64_t cols, lsmi_table** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lsmi_table{lsmi::grid_positions(rows, cols)};
  });
}

lsmi_status lsmi_mask_positions(const char* mask, lsmi_table** out) {
  return guarded([&] {
    require(mask, "mask");
    require(out, "out");
    *out = new lsmi_table{lsmi::mask_positions(mask)};
  });
}

lsmi_status lsmi_summarize(const lsmi_table* features, const lsmi_table* positions,
                           const int64_t* anchors, size_t n_anchors,
                           const lsmi_config* config, lsmi_layout** out) {
  return guarded([&] {
    require(features, "features");
    require(positions, "positions");
    require(out, "out");
    lsmi::GridSpec grid{positions->values, read_pairs(anchors, n_anchors)};
    *out = new lsmi_layout{
        lsmi::grid_summarize(features->values, grid, to_config(config))};
  });
}

lsmi_status lsmi_summarize_dataset(const lsmi_table* features,
                                   const lsmi_table* positions,
                                   const int64_t* anchors, size_t n_anchors,
                                   lsmi_dataset** out) {
  return guarded([&] {
    require(features, "features");
    require(positions, "positions");
    require(out, "out");
    lsmi::GridSpec grid{positions->values, read_pairs(anchors, n_anchors)};
    lsmi::GridProblem problem = lsmi::grid_problem(features->values, grid);
    auto* ds = new lsmi_dataset{std::move(problem.data), {}};
    ds->rows[LSMI_PAIRED_X] = std::move(problem.anchor_items);
    ds->rows[LSMI_PAIRED_Y] = std::move(problem.anchor_cells);
    ds->rows[LSMI_UNPAIRED_X] = std::move(problem.free_items);
    ds->rows[LSMI_UNPAIRED_Y] = std::move(problem.free_cells);
    *out = ds;
  });
}

lsmi_status lsmi_layout_counts(const lsmi_layout* layout, size_t* placed,
                               size_t* unplaced, size_t* empty) {
  return guarded([&] {
    require(layout, "layout");
    if (placed) *placed = layout->layout.placements.size();
    if (unplaced) *unplaced = layout->layout.unplaced_items.size();
    if (empty) *empty = layout->layout.empty_positions.size();
  });
}

lsmi_status lsmi_layout_placements(const lsmi_layout* layout, int64_t* pairs,
                                   size_t capacity) {
  return guarded([&] {
    require(layout, "layout");
    const auto& p = layout->layout.placements;
    require_capacity(p.size(), capacity, "placements");
    if (!p.empty()) require(pairs, "pairs");
    write_pairs(p, pairs);
  });
}

lsmi_status lsmi_layout_unplaced(const lsmi_layout* layout, int64_t* items,
                                 size_t capacity) {
  return guarded([&] {
    require(layout, "layout");
    const auto& u = layout->layout.unplaced_items;
    require_capacity(u.size(), capacity, "unplaced items");
    if (!u.empty()) require(items, "items");
    std::copy(u.begin(), u.end(), items);
  });
}

lsmi_status lsmi_layout_empty(const lsmi_layout* layout, int64_t* positions,
                              size_t capacity) {
  return guarded([&] {
    require(layout, "layout");
    const auto& e = layout->layout.empty_positions;
    require_capacity(e.size(), capacity, "empty positions");
    if (!e.empty()) require(positions, "positions");
    std::copy(e.begin(), e.end(), positions);
  });
}

void lsmi_layout_free(lsmi_layout* layout) { delete layout; }

}  // extern "C"

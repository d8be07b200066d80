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

// Exercises the shared library through its C header only.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lsmi/lsmi.h"

namespace {

lsmi_dataset* small_dataset(uint64_t seed) {
  lsmi_synthetic_spec spec;
  lsmi_synthetic_default(&spec);
  spec.n = 20;
  spec.n_x = 40;
  spec.n_y = 30;
  spec.seed = seed;
  lsmi_dataset* ds = nullptr;
  REQUIRE(lsmi_dataset_generate(&spec, &ds) == LSMI_OK);
  return ds;
}

lsmi_config small_config() {
  lsmi_config config;
  lsmi_config_default(&config);
  config.b = 20;
  return config;
}

}  // namespace

TEST_CASE("defaults") {
  lsmi_config c;
  lsmi_config_default(&c);
  CHECK(c.b == 200);
  CHECK(c.epsilon == 0.3);
  CHECK(c.lambda == 0.01);
  CHECK(c.beta == 0.8);
  CHECK(c.max_outer_iters == 20);
  CHECK(c.eta == 1e-9);
  CHECK(std::string(lsmi_version()).size() > 0);
}

TEST_CASE("table round trip") {
  const double values[6] = {1, 2, 3, 4, 5, 6};
  lsmi_table* t = nullptr;
  REQUIRE(lsmi_table_create(values, 3, 2, &t) == LSMI_OK);
  int64_t rows = 0;
  int64_t cols = 0;
  CHECK(lsmi_table_shape(t, &rows, &cols) == LSMI_OK);
  CHECK(rows == 3);
  CHECK(cols == 2);
  double back[6] = {};
  CHECK(lsmi_table_data(t, back, 6) == LSMI_OK);
  CHECK(back[3] == 4.0);
  CHECK(lsmi_table_data(t, back, 5) == LSMI_ERR_INPUT);
  CHECK(std::string(lsmi_last_error()).find("too small") != std::string::npos);

  const std::string path = "c_api_table.csv";
  CHECK(lsmi_table_write(t, path.c_str()) == LSMI_OK);
  lsmi_table* read = nullptr;
  REQUIRE(lsmi_table_read(path.c_str(), &read) == LSMI_OK);
  double again[6] = {};
  CHECK(lsmi_table_data(read, again, 6) == LSMI_OK);
  for (int i = 0; i < 6; ++i) CHECK(again[i] == values[i]);
  std::remove(path.c_str());
  lsmi_table_free(read);
  lsmi_table_free(t);
  lsmi_table_free(nullptr);
}

TEST_CASE("errors map to status codes") {
  lsmi_table* t = nullptr;
  CHECK(lsmi_table_read("/nonexistent/x.csv", &t) == LSMI_ERR_INPUT);
  CHECK(t == nullptr);
  CHECK(std::string(lsmi_last_error()).find("cannot open") != std::string::npos);
  CHECK(lsmi_table_create(nullptr, 2, 2, &t) == LSMI_ERR_INPUT);
  lsmi_synthetic_spec spec;
  lsmi_synthetic_default(&spec);
  spec.kind = "cubic";
  lsmi_dataset* ds = nullptr;
  CHECK(lsmi_dataset_generate(&spec, &ds) == LSMI_ERR_INPUT);
  CHECK(lsmi_fit_run(nullptr, nullptr, nullptr) == LSMI_ERR_INPUT);
}

TEST_CASE("constant and singular inputs") {
  std::vector<double> ones(10, 1.0);
  lsmi_table* flat = nullptr;
  REQUIRE(lsmi_table_create(ones.data(), 10, 1, &flat) == LSMI_OK);
  lsmi_dataset* ds = nullptr;
  REQUIRE(lsmi_dataset_from_tables(flat, flat, nullptr, nullptr, &ds) == LSMI_OK);
  lsmi_config config = small_config();
  config.beta = 1.0;
  config.lambda = 0.0;
  lsmi_fit* fit = nullptr;
  // A constant sample has no usable kernel width.
  CHECK(lsmi_fit_run(ds, &config, &fit) == LSMI_ERR_INPUT);
  lsmi_dataset_free(ds);

  // Two distinct values repeated: ten basis functions span only four
  // directions, so the unregularised system is singular.
  std::vector<double> two(10);
  for (size_t i = 0; i < 10; ++i) two[i] = i < 5 ? 0.0 : 1.0;
  lsmi_table* rep = nullptr;
  REQUIRE(lsmi_table_create(two.data(), 10, 1, &rep) == LSMI_OK);
  REQUIRE(lsmi_dataset_from_tables(rep, rep, nullptr, nullptr, &ds) == LSMI_OK);
  CHECK(lsmi_fit_run(ds, &config, &fit) == LSMI_ERR_NUMERICAL);
  CHECK(std::string(lsmi_last_error()).size() > 0);
  config.lambda = 1e-3;
  REQUIRE(lsmi_fit_run(ds, &config, &fit) == LSMI_OK);
  lsmi_fit_free(fit);
  lsmi_dataset_free(ds);
  lsmi_table_free(rep);
  lsmi_table_free(flat);
}

TEST_CASE("fit round trip") {
  lsmi_dataset* ds = small_dataset(3);
  int64_t n = 0, n_x = 0, n_y = 0, dx = 0, dy = 0;
  CHECK(lsmi_dataset_counts(ds, &n, &n_x, &n_y, &dx, &dy) == LSMI_OK);
  CHECK(n == 20);
  CHECK(n_x == 40);
  CHECK(n_y == 30);
  const lsmi_config config = small_config();
  lsmi_fit* fit = nullptr;
  REQUIRE(lsmi_fit_run(ds, &config, &fit) == LSMI_OK);

  lsmi_fit_summary summary;
  CHECK(lsmi_fit_get_summary(fit, &summary) == LSMI_OK);
  CHECK(summary.plan_rows == 40);
  CHECK(summary.plan_cols == 30);
  CHECK(summary.basis_size == 20);
  CHECK(summary.max_marginal_violation <= 1e-9);

  size_t count = 0;
  CHECK(lsmi_fit_trace(fit, nullptr, 0, &count) == LSMI_ERR_INPUT);
  CHECK(count == static_cast<size_t>(summary.iterations_run) + 1);
  std::vector<double> trace(count);
  CHECK(lsmi_fit_trace(fit, trace.data(), trace.size(), &count) == LSMI_OK);
  for (size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-9);

  std::vector<lsmi_timing> timings(static_cast<size_t>(summary.iterations_run));
  CHECK(lsmi_fit_timings(fit, timings.data(), timings.size(), &count) == LSMI_OK);
  CHECK(count == timings.size());

  std::vector<double> plan(40 * 30);
  CHECK(lsmi_fit_plan(fit, plan.data(), plan.size()) == LSMI_OK);
  for (int i = 0; i < 40; ++i) {
    double row = 0.0;
    for (int j = 0; j < 30; ++j) row += plan[static_cast<size_t>(i * 30 + j)];
    CHECK(row == doctest::Approx(1.0 / 40.0).epsilon(1e-9));
  }

  std::vector<double> alpha(20);
  CHECK(lsmi_fit_alpha(fit, alpha.data(), alpha.size(), &count) == LSMI_OK);
  CHECK(count == 20);

  double smi = 0.0;
  CHECK(lsmi_fit_smi(fit, ds, &smi) == LSMI_OK);
  CHECK(smi > 0.0);
  double smi_p = 0.0;
  CHECK(lsmi_fit_smi_paired(fit, ds, 0.8, &smi_p) == LSMI_OK);
  CHECK(std::isfinite(smi_p));

  lsmi_table* px = nullptr;
  lsmi_table* py = nullptr;
  REQUIRE(lsmi_dataset_part(ds, LSMI_PAIRED_X, &px) == LSMI_OK);
  REQUIRE(lsmi_dataset_part(ds, LSMI_PAIRED_Y, &py) == LSMI_OK);
  std::vector<double> r(20);
  CHECK(lsmi_fit_evaluate(fit, px, py, r.data(), r.size()) == LSMI_OK);
  CHECK(lsmi_fit_evaluate(fit, px, py, r.data(), 3) == LSMI_ERR_INPUT);

  std::vector<int64_t> pairs(2 * 30);
  CHECK(lsmi_fit_assign(fit, LSMI_ASSIGN_OPTIMAL, pairs.data(), 30, &count) == LSMI_OK);
  CHECK(count == 30);
  CHECK(lsmi_fit_assign(fit, LSMI_ASSIGN_GREEDY, pairs.data(), 10, &count) == LSMI_ERR_INPUT);
  CHECK(count == 30);

  const int64_t truth[4] = {0, 0, 1, 1};
  double acc = -1.0;
  CHECK(lsmi_fit_topk(fit, truth, 2, 30, &acc) == LSMI_OK);
  CHECK(acc == 1.0);
  CHECK(lsmi_fit_topk(fit, truth, 2, 0, &acc) == LSMI_ERR_INPUT);

  // No source rows for generated data.
  int64_t rows[40];
  CHECK(lsmi_dataset_source_rows(ds, LSMI_UNPAIRED_X, rows, 40, &count) == LSMI_ERR_INPUT);

  lsmi_table_free(px);
  lsmi_table_free(py);
  lsmi_fit_free(fit);
  lsmi_dataset_free(ds);
}

TEST_CASE("datasets from tables keep source rows") {
  std::vector<double> xs(60);
  std::vector<double> ys(60);
  for (int i = 0; i < 60; ++i) {
    xs[static_cast<size_t>(i)] = i;
    ys[static_cast<size_t>(i)] = 3.0 * i;
  }
  lsmi_table* x = nullptr;
  lsmi_table* y = nullptr;
  REQUIRE(lsmi_table_create(xs.data(), 60, 1, &x) == LSMI_OK);
  REQUIRE(lsmi_table_create(ys.data(), 60, 1, &y) == LSMI_OK);
  lsmi_dataset* ds = nullptr;
  REQUIRE(lsmi_dataset_semi_supervised(x, y, 10, 30, 20, 4, &ds) == LSMI_OK);
  int64_t rows[30];
  size_t count = 0;
  CHECK(lsmi_dataset_source_rows(ds, LSMI_UNPAIRED_X, rows, 30, &count) == LSMI_OK);
  CHECK(count == 30);
  lsmi_table* ux = nullptr;
  REQUIRE(lsmi_dataset_part(ds, LSMI_UNPAIRED_X, &ux) == LSMI_OK);
  double vals[30];
  CHECK(lsmi_table_data(ux, vals, 30) == LSMI_OK);
  for (int i = 0; i < 30; ++i) CHECK(vals[i] == static_cast<double>(rows[i]));
  lsmi_table_free(ux);
  lsmi_dataset_free(ds);

  const int64_t pairs[4] = {5, 7, 9, 1};
  REQUIRE(lsmi_dataset_from_pairs(x, y, pairs, 2, &ds) == LSMI_OK);
  int64_t prow[2];
  CHECK(lsmi_dataset_source_rows(ds, LSMI_PAIRED_Y, prow, 2, &count) == LSMI_OK);
  CHECK(prow[0] == 7);
  CHECK(prow[1] == 1);
  lsmi_dataset_free(ds);
  CHECK(lsmi_dataset_semi_supervised(x, y, 50, 30, 20, 4, &ds) == LSMI_ERR_INPUT);
  lsmi_table_free(x);
  lsmi_table_free(y);
}

TEST_CASE("split features") {
  std::vector<double> v(4 * 50);
  for (int r = 0; r < 50; ++r) {
    const double a = std::sin(r * 1.3);
    const double b = std::cos(r * 0.7);
    v[static_cast<size_t>(4 * r + 0)] = a;
    v[static_cast<size_t>(4 * r + 1)] = b;
    v[static_cast<size_t>(4 * r + 2)] = a + 0.01 * std::sin(r * 5.1);
    v[static_cast<size_t>(4 * r + 3)] = b + 0.01 * std::cos(r * 3.3);
  }
  lsmi_table* t = nullptr;
  REQUIRE(lsmi_table_create(v.data(), 50, 4, &t) == LSMI_OK);
  lsmi_table* x = nullptr;
  lsmi_table* y = nullptr;
  int64_t xc[4];
  int64_t yc[4];
  size_t warnings = 9;
  REQUIRE(lsmi_split_features(t, 2, &x, &y, xc, yc, 4, &warnings) == LSMI_OK);
  CHECK(xc[0] == 0);
  CHECK(xc[1] == 1);
  CHECK(yc[0] == 2);
  CHECK(yc[1] == 3);
  CHECK(warnings == 0);
  lsmi_table_free(x);
  lsmi_table_free(y);
  lsmi_table_free(t);
}

TEST_CASE("cross-validation") {
  lsmi_dataset* ds = small_dataset(5);
  const lsmi_config config = small_config();
  const double lambdas[2] = {0.1, 0.01};
  const double betas[2] = {0.5, 1.0};
  lsmi_cv_report* report = nullptr;
  REQUIRE(lsmi_cross_validate(ds, &config, lambdas, 2, betas, 2, 0.5, 0, &report) == LSMI_OK);
  lsmi_cv_score scores[4];
  size_t count = 0;
  CHECK(lsmi_cv_scores(report, scores, 4, &count) == LSMI_OK);
  CHECK(count == 4);
  double lambda = 0.0, beta = 0.0, score = 0.0;
  CHECK(lsmi_cv_best(report, &lambda, &beta, &score) == LSMI_OK);
  double lowest = scores[0].score;
  for (const auto& s : scores) lowest = std::fmin(lowest, s.score);
  CHECK(score == lowest);
  lsmi_cv_report_free(report);
  CHECK(lsmi_cross_validate(ds, &config, lambdas, 2, betas, 2, 1.5, 0, &report) == LSMI_ERR_INPUT);
  lsmi_dataset_free(ds);
}

TEST_CASE("grid summarisation") {
  lsmi_table* cells = nullptr;
  REQUIRE(lsmi_grid_positions(3, 3, &cells) == LSMI_OK);
  std::vector<double> f(12 * 2);
  for (size_t i = 0; i < f.size(); ++i) f[i] = std::sin(static_cast<double>(i) * 0.37);
  lsmi_table* features = nullptr;
  REQUIRE(lsmi_table_create(f.data(), 12, 2, &features) == LSMI_OK);
  const int64_t anchors[4] = {0, 0, 5, 8};
  const lsmi_config config = small_config();
  lsmi_layout* layout = nullptr;
  REQUIRE(lsmi_summarize(features, cells, anchors, 2, &config, &layout) == LSMI_OK);
  size_t placed = 0, unplaced = 0, empty = 0;
  CHECK(lsmi_layout_counts(layout, &placed, &unplaced, &empty) == LSMI_OK);
  CHECK(placed == 9);
  CHECK(unplaced == 3);
  CHECK(empty == 0);
  std::vector<int64_t> pairs(2 * placed);
  CHECK(lsmi_layout_placements(layout, pairs.data(), placed) == LSMI_OK);
  CHECK(pairs[0] == 0);
  CHECK(pairs[1] == 0);
  CHECK(pairs[16] == 5);
  CHECK(pairs[17] == 8);
  std::vector<int64_t> items(unplaced);
  CHECK(lsmi_layout_unplaced(layout, items.data(), items.size()) == LSMI_OK);
  CHECK(lsmi_layout_empty(layout, nullptr, 0) == LSMI_OK);
  lsmi_layout_free(layout);

  lsmi_dataset* ds = nullptr;
  REQUIRE(lsmi_summarize_dataset(features, cells, anchors, 2, &ds) == LSMI_OK);
  int64_t n = 0, n_x = 0, n_y = 0, dx = 0, dy = 0;
  CHECK(lsmi_dataset_counts(ds, &n, &n_x, &n_y, &dx, &dy) == LSMI_OK);
  CHECK(n == 2);
  CHECK(n_x == 10);
  CHECK(n_y == 7);
  lsmi_dataset_free(ds);

  const int64_t conflict[4] = {0, 0, 0, 1};
  CHECK(lsmi_summarize(features, cells, conflict, 2, &config, &layout) == LSMI_ERR_INPUT);
  lsmi_table* mask = nullptr;
  REQUIRE(lsmi_mask_positions("#.\n##\n", &mask) == LSMI_OK);
  int64_t rows = 0, cols = 0;
  CHECK(lsmi_table_shape(mask, &rows, &cols) == LSMI_OK);
  CHECK(rows == 3);
  lsmi_table_free(mask);
  lsmi_table_free(features);
  lsmi_table_free(cells);
}

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

#include "lsmi/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lsmi {

double holdout_error(const RatioModel& model, const SampleMatrix& test_x,
                     const SampleMatrix& test_y) {
  if (test_x.rows() != test_y.rows()) throw_input("hold-out pair count mismatch");
  const Index m = test_x.rows();
  if (m < 2) throw_input("hold-out set needs at least 2 pairs");

  const Matrix K = kernel_columns(model.basis.x_basis, test_x, model.basis.sigma_x);
  const Matrix L = kernel_columns(model.basis.y_basis, test_y, model.basis.sigma_y);
  const Vector& a = model.alpha;
  const double md = static_cast<double>(m);
  // sum_{x, y} r(x, y)^2 = a^T ((K K^T) o (L L^T)) a.
  const Matrix cross = (K * K.transpose()).cwiseProduct(L * L.transpose());
  const double sum_sq = a.dot(cross * a);
  const double sum_pairs = a.dot(K.cwiseProduct(L).rowwise().sum());
  return sum_sq / (2.0 * md * md) - sum_pairs / md;
}

namespace {

SampleMatrix take_rows(const SampleMatrix& m, const std::vector<Index>& rows) {
  SampleMatrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

CvScore select_best(const std::vector<CvScore>& scores) {
  if (scores.empty()) throw_input("no CV scores to select from");
  const auto prefer = [](const CvScore& a, const CvScore& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    return a.beta > b.beta;
  };
  return *std::min_element(scores.begin(), scores.end(), prefer);
}

CvReport cross_validate(const SampleSet& data, const EstimatorConfig& config,
                        const CvGrid& grid) {
  data.validate();
  config.validate();
  if (grid.lambdas.empty() || grid.betas.empty()) throw_input("empty CV grid");
  if (!(grid.holdout_fraction > 0.0 && grid.holdout_fraction < 1.0)) {
    throw_input("holdout fraction must lie in (0, 1)");
  }
  const Index n = data.n();
  if (n < 4) throw_input("insufficient paired samples for CV");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(derive_seed(grid.seed, 0x6376));
  std::shuffle(order.begin(), order.end(), rng);
  const Index n_test = std::clamp<Index>(
      static_cast<Index>(std::llround(grid.holdout_fraction * static_cast<double>(n))),
      2, n - 2);
  const std::vector<Index> test_rows(order.begin(), order.begin() + n_test);
  const std::vector<Index> train_rows(order.begin() + n_test, order.end());

  SampleSet train;
  train.paired_x = take_rows(data.paired_x, train_rows);
  train.paired_y = take_rows(data.paired_y, train_rows);
  train.unpaired_x = data.unpaired_x;
  train.unpaired_y = data.unpaired_y;
  const SampleMatrix test_x = take_rows(data.paired_x, test_rows);
  const SampleMatrix test_y = take_rows(data.paired_y, test_rows);

  const BasisSet basis = sample_basis(train.pooled_x(), train.pooled_y(),
                                      config.b, config.seed);

  CvReport report;
  for (double lambda : grid.lambdas) {
    for (double beta : grid.betas) {
      EstimatorConfig point = config;
      point.lambda = lambda;
      point.beta = beta;
      const FitResult fitted = fit_with_basis(train, point, basis);
      report.scores.push_back(
          {lambda, beta, holdout_error(fitted.model, test_x, test_y)});
    }
  }

  const CvScore best = select_best(report.scores);
  report.best_lambda = best.lambda;
  report.best_beta = best.beta;
  report.best_score = best.score;
  return report;
}

}  // namespace lsmi

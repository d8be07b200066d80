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

#include <doctest.h>

#include <cmath>

#include "lsmi/data.hpp"
#include "lsmi/estimator.hpp"
#include "test_util.hpp"

using namespace lsmi;
using lsmi::testing::max_abs_diff;
using lsmi::testing::as_span;
using lsmi::testing::normal_matrix;

namespace {

SampleSet small_linear(std::uint64_t seed, Index n = 30, Index pool = 80) {
  SyntheticSpec spec;
  spec.n = n;
  spec.n_x = pool;
  spec.n_y = pool;
  spec.seed = seed;
  return generate(spec);
}

EstimatorConfig small_config() {
  EstimatorConfig config;
  config.b = 40;
  return config;
}

}  // namespace

TEST_CASE("objective trace never increases") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FitResult result = fit(small_linear(seed), small_config());
    REQUIRE(result.objective_trace.size() == result.iterations_run + 1);
    for (std::size_t t = 1; t < result.objective_trace.size(); ++t) {
      CHECK(result.objective_trace[t] <= result.objective_trace[t - 1] + 1e-9);
    }
    CHECK(result.plan.max_marginal_violation() <= 1e-9);
    CHECK(result.timings.size() == result.iterations_run);
  }
}

TEST_CASE("last trace value is the objective at the returned iterate") {
  const SampleSet data = small_linear(3);
  const EstimatorConfig config = small_config();
  const FitResult result = fit(data, config);
  const BasisSet& basis = result.model.basis;
  const FeatureColumns all = feature_columns(basis, data.pooled_x(), data.pooled_y());
  const FeatureColumns pair = feature_columns(basis, data.paired_x, data.paired_y);
  const FeatureColumns unp = feature_columns(basis, data.unpaired_x, data.unpaired_y);
  const QuadTerm quad = compute_H(all.K, all.L);
  const LinTerm lin = compute_h(pair.K, pair.L, unp.K, unp.L, result.plan, config.beta);
  const double J = objective(quad, lin, result.model.alpha, result.plan, config.lambda,
                             config.epsilon);
  CHECK(J == doctest::Approx(result.objective_trace.back()).epsilon(1e-10));
}

TEST_CASE("fits are bitwise reproducible") {
  const SampleSet data = small_linear(7);
  const FitResult a = fit(data, small_config());
  const FitResult b = fit(data, small_config());
  CHECK(a.objective_trace == b.objective_trace);
  CHECK(max_abs_diff(a.plan.pi(), b.plan.pi()) == 0.0);
  CHECK(max_abs_diff(a.model.alpha, b.model.alpha) == 0.0);
}

TEST_CASE("paired-only fit needs no pools and no plan iterations") {
  SampleSet data = small_linear(1);
  data.unpaired_x.resize(0, 1);
  data.unpaired_y.resize(0, 1);
  EstimatorConfig config = small_config();
  config.beta = 1.0;
  const FitResult result = fit(data, config);
  CHECK(result.converged);
  CHECK(result.model.alpha.allFinite());
  CHECK(smi_estimate(result.model, data) > 0.0);

  config.beta = 0.5;
  CHECK_THROWS_AS(fit(data, config), Error);
}

TEST_CASE("beta above zero requires paired samples") {
  SampleSet data = small_linear(1);
  data.paired_x.resize(0, 1);
  data.paired_y.resize(0, 1);
  EstimatorConfig config = small_config();
  CHECK_THROWS_AS(fit(data, config), Error);
  config.beta = 0.0;
  const FitResult result = fit(data, config);
  CHECK(result.plan.max_marginal_violation() <= 1e-9);
}

TEST_CASE("config validation") {
  const SampleSet data = small_linear(1);
  EstimatorConfig config = small_config();
  config.epsilon = 0.0;
  CHECK_THROWS_AS(fit(data, config), Error);
  config = small_config();
  config.lambda = -1.0;
  CHECK_THROWS_AS(fit(data, config), Error);
  config = small_config();
  config.beta = 1.5;
  CHECK_THROWS_AS(fit(data, config), Error);
  config = small_config();
  config.b = 0;
  CHECK_THROWS_AS(fit(data, config), Error);
  SampleSet bad = data;
  bad.paired_y = normal_matrix(bad.n() + 1, 1, 1);
  CHECK_THROWS_AS(fit(bad, small_config()), Error);
}

TEST_CASE("SMI estimates match brute-force sums") {
  const SampleSet data = small_linear(5, 10, 15);
  const FitResult result = fit(data, small_config());
  const SampleMatrix px = data.pooled_x();
  const SampleMatrix py = data.pooled_y();
  double sum = 0.0;
  for (Index i = 0; i < px.rows(); ++i) {
    const Vector xi = px.row(i).transpose();
    for (Index j = 0; j < py.rows(); ++j) {
      const Vector yj = py.row(j).transpose();
      const double r = result.model.evaluate(as_span(xi), as_span(yj));
      sum += (r - 1.0) * (r - 1.0);
    }
  }
  const double expected = sum / (2.0 * static_cast<double>(px.rows() * py.rows()));
  CHECK(smi_estimate(result.model, data) == doctest::Approx(expected).epsilon(1e-12));

  const double beta = 0.3;
  double paired = 0.0;
  for (Index i = 0; i < data.n(); ++i) {
    const Vector xi = data.paired_x.row(i).transpose();
    const Vector yi = data.paired_y.row(i).transpose();
    paired += result.model.evaluate(as_span(xi), as_span(yi));
  }
  double unpaired = 0.0;
  for (Index i = 0; i < data.n_x(); ++i) {
    const Vector xi = data.unpaired_x.row(i).transpose();
    for (Index j = 0; j < data.n_y(); ++j) {
      const Vector yj = data.unpaired_y.row(j).transpose();
      unpaired += result.plan.pi()(i, j) * result.model.evaluate(as_span(xi), as_span(yj));
    }
  }
  const double expected_paired =
      beta / (2.0 * static_cast<double>(data.n())) * paired + (1.0 - beta) / 2.0 * unpaired - 0.5;
  CHECK(smi_estimate_paired(result.model, result.plan, data, beta) ==
        doctest::Approx(expected_paired).epsilon(1e-12));
}

TEST_CASE("dependent data scores above independent data") {
  SyntheticSpec spec;
  spec.n = 60;
  spec.n_x = 100;
  spec.n_y = 100;
  spec.seed = 2;
  const SampleSet dep = generate(spec);
  spec.kind = SyntheticKind::kRandom;
  const SampleSet ind = generate(spec);
  EstimatorConfig config = small_config();
  const double s_dep = smi_estimate(fit(dep, config).model, dep);
  const double s_ind = smi_estimate(fit(ind, config).model, ind);
  CHECK(s_dep > 3.0 * s_ind);
}

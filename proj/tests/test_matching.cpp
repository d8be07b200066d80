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

#include <algorithm>
#include <set>

#include "lsmi/matching.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lsmi;
using lsmi::testing::normal_matrix;

namespace {

double weight_of(const std::vector<IndexPair>& pairs, const Matrix& W) {
  double s = 0.0;
  for (const auto& [i, j] : pairs) s += W(i, j);
  return s;
}

bool injective(const std::vector<IndexPair>& pairs) {
  std::set<Index> xs;
  std::set<Index> ys;
  for (const auto& [i, j] : pairs) {
    if (!xs.insert(i).second || !ys.insert(j).second) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("assignment picks the dominant diagonal") {
  Matrix pi = Matrix::Constant(4, 4, 0.01);
  pi.diagonal().setConstant(0.2);
  const TransportPlan plan(pi / pi.sum());
  for (AssignMethod m : {AssignMethod::kGreedy, AssignMethod::kOptimal}) {
    const Assignment a = plan_to_assignment(plan, m);
    REQUIRE(a.pairs.size() == 4);
    for (Index i = 0; i < 4; ++i) CHECK(a.pairs[static_cast<std::size_t>(i)] == IndexPair{i, i});
  }
}

TEST_CASE("greedy breaks ties in index order") {
  const Assignment a = plan_to_assignment(TransportPlan::uniform(3, 3), AssignMethod::kGreedy);
  REQUIRE(a.pairs.size() == 3);
  for (Index i = 0; i < 3; ++i) CHECK(a.pairs[static_cast<std::size_t>(i)] == IndexPair{i, i});
}

TEST_CASE("optimal matching reaches the brute-force optimum") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index rows = 2 + static_cast<Index>(seed % 4);
    const Index cols = rows + static_cast<Index>(seed % 3);
    const Matrix W = normal_matrix(rows, cols, seed);
    const auto pairs = max_weight_matching(W);
    REQUIRE(pairs.size() == static_cast<std::size_t>(rows));
    CHECK(injective(pairs));
    CHECK(weight_of(pairs, W) == doctest::Approx(lsmi::oracle::brute_force_best_weight(W)).epsilon(1e-12));
    // The transposed problem covers every column instead.
    const auto t = max_weight_matching(W.transpose());
    CHECK(t.size() == static_cast<std::size_t>(rows));
    CHECK(weight_of(t, W.transpose()) == doctest::Approx(weight_of(pairs, W)).epsilon(1e-12));
  }
}

TEST_CASE("optimal captures at least the greedy mass") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix pi = normal_matrix(12, 9, seed).cwiseAbs();
    pi /= pi.sum();
    const TransportPlan plan(pi, false);
    const Assignment g = plan_to_assignment(plan, AssignMethod::kGreedy);
    const Assignment o = plan_to_assignment(plan, AssignMethod::kOptimal);
    CHECK(g.pairs.size() == 9);
    CHECK(o.pairs.size() == 9);
    CHECK(injective(g.pairs));
    CHECK(injective(o.pairs));
    CHECK(std::is_sorted(o.pairs.begin(), o.pairs.end()));
    CHECK(o.captured_mass(pi) >= g.captured_mass(pi) - 1e-15);
  }
}

TEST_CASE("top-k accuracy") {
  const TransportPlan uniform = TransportPlan::uniform(100, 100);
  std::vector<IndexPair> truth;
  for (Index i = 0; i < 100; ++i) truth.emplace_back(i, i);
  // Equal entries rank by column: only row 0's truth is first.
  CHECK(topk_accuracy(uniform, truth, 1) == doctest::Approx(0.01));
  CHECK(topk_accuracy(uniform, truth, 2) == doctest::Approx(0.02));

  const Matrix noise = normal_matrix(30, 30, 4).cwiseAbs();
  const TransportPlan plan(noise / noise.sum(), false);
  std::vector<IndexPair> t30;
  for (Index i = 0; i < 30; ++i) t30.emplace_back(i, (i * 7) % 30);
  double prev = 0.0;
  for (std::size_t k = 1; k <= 30; ++k) {
    const double acc = topk_accuracy(plan, t30, k);
    CHECK(acc >= prev);
    prev = acc;
  }
  CHECK(prev == 1.0);

  Matrix diag = Matrix::Identity(5, 5) + Matrix::Constant(5, 5, 0.1);
  std::vector<IndexPair> t5;
  for (Index i = 0; i < 5; ++i) t5.emplace_back(i, i);
  CHECK(topk_accuracy(TransportPlan(diag / diag.sum()), t5, 1) == 1.0);
  CHECK(topk_accuracy(plan, {}, 1) == 0.0);
  CHECK_THROWS_AS(topk_accuracy(plan, t30, 0), Error);
  CHECK_THROWS_AS(topk_accuracy(plan, {{0, 30}}, 1), Error);
}

TEST_CASE("grid and mask positions") {
  const SampleMatrix g = grid_positions(2, 3);
  REQUIRE(g.rows() == 6);
  CHECK(g(4, 0) == 1.0);
  CHECK(g(4, 1) == 1.0);
  CHECK(g(2, 0) == 0.0);
  CHECK(g(2, 1) == 2.0);
  const SampleMatrix m = mask_positions("#.#\n.X.\n");
  REQUIRE(m.rows() == 3);
  CHECK(m(0, 1) == 0.0);
  CHECK(m(1, 1) == 2.0);
  CHECK(m(2, 0) == 1.0);
  CHECK(m(2, 1) == 1.0);
  CHECK_THROWS_AS(grid_positions(0, 3), Error);
  CHECK_THROWS_AS(mask_positions("...\n"), Error);
}

TEST_CASE("grid spec validation") {
  GridSpec spec{grid_positions(2, 2), {{0, 0}, {1, 0}}};
  CHECK_THROWS_AS(spec.validate(4), Error);
  spec.anchors = {{0, 0}, {0, 1}};
  CHECK_THROWS_AS(spec.validate(4), Error);
  spec.anchors = {{0, 4}};
  CHECK_THROWS_AS(spec.validate(4), Error);
  spec.anchors = {{4, 0}};
  CHECK_THROWS_AS(spec.validate(4), Error);
  spec.anchors = {{3, 0}};
  CHECK_NOTHROW(spec.validate(4));
  SampleMatrix dup = grid_positions(2, 2);
  dup.row(3) = dup.row(0);
  CHECK_THROWS_AS((GridSpec{dup, {}}.validate(4)), Error);
}

TEST_CASE("fully anchored grid returns the anchors") {
  const SampleMatrix features = normal_matrix(4, 3, 1);
  const GridSpec grid{grid_positions(2, 2), {{2, 0}, {0, 1}, {3, 2}, {1, 3}}};
  const Layout layout = grid_summarize(features, grid, EstimatorConfig{});
  const std::vector<IndexPair> expected{{2, 0}, {0, 1}, {3, 2}, {1, 3}};
  CHECK(layout.placements == expected);
  CHECK(layout.unplaced_items.empty());
  CHECK(layout.empty_positions.empty());
}

TEST_CASE("items that are their own coordinates land near their cells") {
  const SampleMatrix cells = grid_positions(6, 6);
  const GridSpec grid{cells, {{0, 0}, {5, 5}, {30, 30}, {14, 14}}};
  EstimatorConfig config;
  config.epsilon = 0.05;
  const Layout layout = grid_summarize(cells, grid, config);
  REQUIRE(layout.placements.size() == 36);
  double error = 0.0;
  for (const auto& [item, pos] : layout.placements) {
    error += (cells.row(item) - cells.row(pos)).cwiseAbs().sum();
  }
  // A uniformly random layout averages 2 * 35/9 ~ 3.9 per item.
  CHECK(error / 36.0 < 1.0);
}

TEST_CASE("more items than cells leaves items unplaced") {
  const SampleMatrix features = normal_matrix(1000, 5, 2);
  const GridSpec grid{grid_positions(16, 20), {{0, 0}, {1, 19}, {2, 300}, {3, 319}}};
  EstimatorConfig config;
  config.b = 100;
  const Layout layout = grid_summarize(features, grid, config);
  CHECK(layout.placements.size() == 320);
  CHECK(layout.unplaced_items.size() == 680);
  CHECK(layout.empty_positions.empty());
  std::vector<IndexPair> flipped;
  for (const auto& [item, pos] : layout.placements) flipped.emplace_back(pos, item);
  CHECK(injective(flipped));
  CHECK(layout.placements[0] == IndexPair{0, 0});
  CHECK(layout.placements[19] == IndexPair{1, 19});
  CHECK(layout.placements[300] == IndexPair{2, 300});
  CHECK(layout.placements[319] == IndexPair{3, 319});
}

TEST_CASE("more cells than items leaves cells empty") {
  const SampleMatrix features = normal_matrix(10, 2, 3);
  const GridSpec grid{grid_positions(4, 4), {}};
  const Layout layout = grid_summarize(features, grid, EstimatorConfig{});
  CHECK(layout.placements.size() == 10);
  CHECK(layout.empty_positions.size() == 6);
  CHECK(layout.unplaced_items.empty());
}

TEST_CASE("grid problem splits anchors from free samples") {
  const SampleMatrix features = normal_matrix(5, 2, 3);
  const GridProblem p = grid_problem(features, {grid_positions(2, 2), {{4, 1}}});
  CHECK(p.data.n() == 1);
  CHECK(p.data.n_x() == 4);
  CHECK(p.data.n_y() == 3);
  CHECK(p.anchor_items == std::vector<Index>{4});
  CHECK(p.free_cells == std::vector<Index>{0, 2, 3});
  const SampleMatrix y = p.data.pooled_y();
  CHECK(std::abs(y.col(0).mean()) < 1e-14);
  CHECK(std::abs(y.col(1).mean()) < 1e-14);
}

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

#include "lsmi/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace lsmi {

double Assignment::captured_mass(const Matrix& weights) const {
  double total = 0.0;
  for (const auto& [i, j] : pairs) total += weights(i, j);
  return total;
}

namespace {

// Shortest augmenting path Hungarian method on an n x m cost matrix with
// n <= m. Returns the column assigned to each row. O(n^2 m).
std::vector<Index> hungarian_min(const Matrix& cost) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<Index> p(m + 1, 0), way(m + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> row_to_col(n, -1);
  for (Index j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<IndexPair> max_weight_matching(const Matrix& weights) {
  if (!weights.allFinite()) throw_input("non-finite matching weights");
  std::vector<IndexPair> pairs;
  if (weights.size() == 0) return pairs;
  if (weights.rows() <= weights.cols()) {
    const auto cols = hungarian_min(-weights);
    for (Index i = 0; i < weights.rows(); ++i) pairs.emplace_back(i, cols[i]);
  } else {
    const Matrix transposed = -weights.transpose();
    const auto rows = hungarian_min(transposed);
    for (Index j = 0; j < weights.cols(); ++j) pairs.emplace_back(rows[j], j);
    std::sort(pairs.begin(), pairs.end());
  }
  return pairs;
}

Assignment plan_to_assignment(const TransportPlan& plan, AssignMethod method) {
  const Matrix& pi = plan.pi();
  Assignment out;
  if (method == AssignMethod::kOptimal) {
    out.pairs = max_weight_matching(pi);
    return out;
  }

  const Index nx = pi.rows();
  const Index ny = pi.cols();
  std::vector<IndexPair> cells;
  cells.reserve(static_cast<std::size_t>(nx * ny));
  for (Index i = 0; i < nx; ++i) {
    for (Index j = 0; j < ny; ++j) cells.emplace_back(i, j);
  }
  // Largest mass first; equal masses in lexicographic (i, j) order.
  std::stable_sort(cells.begin(), cells.end(),
                   [&](const IndexPair& a, const IndexPair& b) {
                     return pi(a.first, a.second) > pi(b.first, b.second);
                   });
  std::vector<char> row_used(nx, 0), col_used(ny, 0);
  const Index target = std::min(nx, ny);
  for (const auto& [i, j] : cells) {
    if (row_used[i] || col_used[j]) continue;
    row_used[i] = col_used[j] = 1;
    out.pairs.emplace_back(i, j);
    if (static_cast<Index>(out.pairs.size()) == target) break;
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

double topk_accuracy(const TransportPlan& plan,
                     const std::vector<IndexPair>& truth, std::size_t k) {
  if (k == 0) throw_input("k must be at least 1");
  if (truth.empty()) return 0.0;
  const Matrix& pi = plan.pi();
  std::size_t hits = 0;
  for (const auto& [i, j] : truth) {
    if (i < 0 || i >= pi.rows() || j < 0 || j >= pi.cols()) {
      throw_input("truth index out of range");
    }
    const double target = pi(i, j);
    std::size_t rank = 0;
    for (Index c = 0; c < pi.cols(); ++c) {
      const double v = pi(i, c);
      if (v > target || (v == target && c < j)) ++rank;
    }
    if (rank < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

void GridSpec::validate(Index item_count) const {
  if (positions.cols() != 2) throw_input("grid positions must be 2-D");
  if (positions.rows() == 0) throw_input("grid has no positions");
  std::set<std::pair<double, double>> seen;
  for (Index p = 0; p < positions.rows(); ++p) {
    if (!seen.emplace(positions(p, 0), positions(p, 1)).second) {
      throw_input("grid positions are not distinct");
    }
  }
  std::set<Index> items, cells;
  for (const auto& [item, pos] : anchors) {
    if (item < 0 || item >= item_count) throw_input("anchor item index out of range");
    if (pos < 0 || pos >= positions.rows()) {
      throw_input("anchor position index out of range");
    }
    if (!items.insert(item).second || !cells.insert(pos).second) {
      throw_input("anchor conflict: index used twice");
    }
  }
}

SampleMatrix grid_positions(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw_input("grid must be at least 1x1");
  SampleMatrix out(rows * cols, 2);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      out(r * cols + c, 0) = static_cast<double>(r);
      out(r * cols + c, 1) = static_cast<double>(c);
    }
  }
  return out;
}

SampleMatrix mask_positions(std::string_view mask) {
  std::vector<std::pair<Index, Index>> cells;
  Index row = 0;
  Index col = 0;
  for (char ch : mask) {
    if (ch == '\n') {
      ++row;
      col = 0;
      continue;
    }
    if (ch == '\r') continue;
    if (ch == '#' || ch == 'X' || ch == 'x' || ch == '1' || ch == '*') {
      cells.emplace_back(row, col);
    }
    ++col;
  }
  if (cells.empty()) throw_input("mask has no cells");
  SampleMatrix out(static_cast<Index>(cells.size()), 2);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    out(static_cast<Index>(k), 0) = static_cast<double>(cells[k].first);
    out(static_cast<Index>(k), 1) = static_cast<double>(cells[k].second);
  }
  return out;
}

namespace {

SampleMatrix normalize_axes(const SampleMatrix& positions) {
  SampleMatrix out = positions.rowwise() - positions.colwise().mean();
  for (Index c = 0; c < out.cols(); ++c) {
    const double sd = std::sqrt(out.col(c).squaredNorm() /
                                static_cast<double>(out.rows()));
    if (sd > 0.0) out.col(c) /= sd;
  }
  return out;
}

SampleMatrix take_rows(const SampleMatrix& m, const std::vector<Index>& rows) {
  SampleMatrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

GridProblem grid_problem(const SampleMatrix& features, const GridSpec& grid) {
  if (features.rows() == 0) throw_input("no items to place");
  grid.validate(features.rows());
  const SampleMatrix coords = normalize_axes(grid.positions);

  GridProblem problem;
  std::vector<char> item_pinned(features.rows(), 0);
  std::vector<char> cell_pinned(grid.positions.rows(), 0);
  for (const auto& [item, pos] : grid.anchors) {
    item_pinned[item] = cell_pinned[pos] = 1;
    problem.anchor_items.push_back(item);
    problem.anchor_cells.push_back(pos);
  }
  for (Index i = 0; i < features.rows(); ++i) {
    if (!item_pinned[i]) problem.free_items.push_back(i);
  }
  for (Index p = 0; p < grid.positions.rows(); ++p) {
    if (!cell_pinned[p]) problem.free_cells.push_back(p);
  }
  problem.data.paired_x = take_rows(features, problem.anchor_items);
  problem.data.paired_y = take_rows(coords, problem.anchor_cells);
  problem.data.unpaired_x = take_rows(features, problem.free_items);
  problem.data.unpaired_y = take_rows(coords, problem.free_cells);
  return problem;
}

Layout grid_summarize(const SampleMatrix& features, const GridSpec& grid,
                      const EstimatorConfig& config) {
  const GridProblem problem = grid_problem(features, grid);
  const auto& free_items = problem.free_items;
  const auto& free_cells = problem.free_cells;

  Layout layout;
  layout.placements = grid.anchors;
  if (!free_items.empty() && !free_cells.empty()) {
    EstimatorConfig cfg = config;
    if (problem.anchor_items.empty()) cfg.beta = 0.0;

    const FitResult fitted = fit(problem.data, cfg);
    const Assignment assignment =
        plan_to_assignment(fitted.plan, AssignMethod::kOptimal);
    std::vector<char> item_done(free_items.size(), 0);
    std::vector<char> cell_done(free_cells.size(), 0);
    for (const auto& [i, j] : assignment.pairs) {
      layout.placements.emplace_back(free_items[i], free_cells[j]);
      item_done[i] = cell_done[j] = 1;
    }
    for (std::size_t i = 0; i < free_items.size(); ++i) {
      if (!item_done[i]) layout.unplaced_items.push_back(free_items[i]);
    }
    for (std::size_t j = 0; j < free_cells.size(); ++j) {
      if (!cell_done[j]) layout.empty_positions.push_back(free_cells[j]);
    }
  } else {
    layout.unplaced_items = free_items;
    layout.empty_positions = free_cells;
  }

  std::sort(layout.placements.begin(), layout.placements.end(),
            [](const IndexPair& a, const IndexPair& b) { return a.second < b.second; });
  return layout;
}

}  // namespace lsmi

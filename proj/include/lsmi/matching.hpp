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

// Hard correspondences from a transport plan, matching accuracy, and grid
// layout summarisation.

#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "lsmi/estimator.hpp"
#include "lsmi/transport.hpp"

namespace lsmi {

/// One-to-one pairs covering the smaller side of the plan.
struct Assignment {
  std::vector<IndexPair> pairs;  // (x_index, y_index), sorted by x_index

  double captured_mass(const Matrix& weights) const;
};

enum class AssignMethod { kGreedy, kOptimal };

Assignment plan_to_assignment(const TransportPlan& plan, AssignMethod method);

/// Maximum-weight matching of every row of `weights` (rows <= cols) or every
/// column (rows > cols). Returns (row, col) pairs sorted by row.
std::vector<IndexPair> max_weight_matching(const Matrix& weights);

/// Fraction of truth pairs (i, j) whose entry ranks within the k largest of
/// row i. Equal entries are ranked by column index.
double topk_accuracy(const TransportPlan& plan,
                     const std::vector<IndexPair>& truth, std::size_t k);

struct GridSpec {
  SampleMatrix positions;           // P x 2 cell coordinates
  std::vector<IndexPair> anchors;   // (item_index, position_index)

  void validate(Index item_count) const;
};

/// rows x cols lattice in row-major order; cell (r, c) has coordinates (r, c).
SampleMatrix grid_positions(Index rows, Index cols);

/// Cells of a text mask. Any of '#', 'X', 'x', '1', '*' marks a cell; lines
/// are rows. Row-major order.
SampleMatrix mask_positions(std::string_view mask);

struct Layout {
  std::vector<IndexPair> placements;  // (item_index, position_index)
  std::vector<Index> unplaced_items;
  std::vector<Index> empty_positions;
};

/// Anchored items and cells form the paired set; the remaining items and the
/// remaining cells (axis-normalised) form the unpaired pools.
struct GridProblem {
  SampleSet data;
  std::vector<Index> anchor_items;
  std::vector<Index> anchor_cells;
  std::vector<Index> free_items;
  std::vector<Index> free_cells;
};

GridProblem grid_problem(const SampleMatrix& features, const GridSpec& grid);

/// Items are x-samples, normalised grid coordinates are y-samples and the
/// anchors form the paired set. Non-anchored items and positions are matched
/// through the fitted plan rounded by the Hungarian method.
Layout grid_summarize(const SampleMatrix& features, const GridSpec& grid,
                      const EstimatorConfig& config);

}  // namespace lsmi

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

// Synthetic generators, delimited table I/O and helpers that turn tables
// into paired/unpaired sample sets.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsmi/common.hpp"
#include "lsmi/estimator.hpp"

namespace lsmi {

enum class SyntheticKind { kRandom, kLinear, kNonlinear, kPca };

SyntheticKind parse_synthetic_kind(std::string_view name);
const char* synthetic_kind_name(SyntheticKind kind);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kLinear;
  Index n = 50;
  Index n_x = 500;
  Index n_y = 500;
  Index dim = 0;                     // 0 selects 1, or 2 for pca
  std::optional<double> noise_sd;    // unset: 0.1 for linear, 0 otherwise
  std::uint64_t seed = 0;
  // Build the unpaired pools from one set of joint draws, so unpaired row i
  // of x belongs with unpaired row i of y. Requires n_x == n_y.
  bool shared_unpaired_draws = false;

  Index resolved_dim() const;
  double resolved_noise_sd() const;
  void validate() const;
};

SampleSet generate(const SyntheticSpec& spec);

struct Table {
  SampleMatrix values;
  std::vector<std::string> header;  // empty when the source had none
};

struct TableOptions {
  char delimiter = 0;                // 0: guess from the first two lines
  std::optional<bool> has_header;    // unset: header if a first-line cell is not numeric
};

Table parse_table(std::string_view text, const TableOptions& options = {});
Table read_table(const std::string& path, const TableOptions& options = {});
void write_table(std::ostream& out, const SampleMatrix& values,
                 const std::vector<std::string>& header = {}, char delimiter = ',');

/// Two-column integer table such as an anchor or paired-index file.
std::vector<IndexPair> parse_index_pairs(std::string_view text);
std::vector<IndexPair> read_index_pairs(const std::string& path);

struct FeatureSplit {
  SampleMatrix x;
  SampleMatrix y;
  std::vector<Index> x_columns;
  std::vector<Index> y_columns;
  std::vector<std::string> warnings;
};

/// Greedy split: walk column pairs by decreasing absolute correlation and send
/// the lower index to x and the higher to y while both are unassigned and both
/// sides have room. Remaining columns fill x then y in index order.
FeatureSplit split_features(const SampleMatrix& table, Index d_x);

/// A sample set built from row subsets of source tables, with the source row
/// of every sample kept for later bookkeeping.
struct IndexedSampleSet {
  SampleSet data;
  std::vector<Index> paired_rows;    // source row of paired sample i (x side)
  std::vector<Index> paired_y_rows;  // source row of paired sample i (y side)
  std::vector<Index> x_rows;         // source row of unpaired x sample i
  std::vector<Index> y_rows;         // source row of unpaired y sample j

  /// (i, j) such that unpaired x i and unpaired y j share a source row.
  std::vector<IndexPair> unpaired_truth() const;
};

/// Shuffled rows: the first n are paired, the next block of max(n_x, n_y)
/// rows feeds the pools. x takes the first n_x rows of the block in shuffled
/// order, y the first n_y rows of an independent reshuffle of the block.
IndexedSampleSet make_semi_supervised(const SampleMatrix& x, const SampleMatrix& y,
                                      Index n, Index n_x, Index n_y,
                                      std::uint64_t seed);

/// Paired set from explicit (x_row, y_row) pairs; every other row of each
/// table goes to its unpaired pool in row order.
IndexedSampleSet from_index_pairs(const SampleMatrix& x, const SampleMatrix& y,
                                  const std::vector<IndexPair>& pairs);

}  // namespace lsmi

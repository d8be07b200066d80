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

#include "lsmi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace lsmi {

Bandwidth::Bandwidth(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw_input("bandwidth must be positive and finite");
  }
}

namespace {

std::vector<Index> choose_without_replacement(Index pool, Index count,
                                              std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(pool));
  std::iota(idx.begin(), idx.end(), Index{0});
  // Partial Fisher-Yates; the first `count` slots hold the draw.
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, pool - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

}  // namespace

Bandwidth median_heuristic(const SampleMatrix& samples, std::uint64_t seed) {
  if (samples.rows() < 2) throw_input("insufficient samples");

  const SampleMatrix* pool = &samples;
  SampleMatrix subset;
  if (samples.rows() > kMedianSubsampleLimit) {
    std::mt19937_64 rng(derive_seed(seed, 0x6d6564));
    auto rows = choose_without_replacement(samples.rows(),
                                           kMedianSubsampleLimit, rng);
    std::sort(rows.begin(), rows.end());
    subset.resize(kMedianSubsampleLimit, samples.cols());
    for (Index r = 0; r < kMedianSubsampleLimit; ++r) {
      subset.row(r) = samples.row(rows[r]);
    }
    pool = &subset;
  }

  const Index m = pool->rows();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      dist.push_back((pool->row(i) - pool->row(j)).norm());
    }
  }

  const std::size_t count = dist.size();
  const std::size_t mid = count / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  double median = dist[mid];
  if (count % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + mid);
    median = 0.5 * (lower + median);
  }
  if (!(median > 0.0)) throw_input("degenerate bandwidth");
  return Bandwidth(median / std::sqrt(2.0));
}

double gaussian_kernel(std::span<const double> x, std::span<const double> x2,
                       Bandwidth sigma) {
  if (x.size() != x2.size()) throw_input("kernel dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x2[i];
    sq += d * d;
  }
  const double s = sigma.sigma();
  return std::exp(-sq / (2.0 * s * s));
}

BasisSet sample_basis(const SampleMatrix& pool_x, const SampleMatrix& pool_y,
                      Index b, std::uint64_t seed) {
  if (pool_x.rows() == 0 || pool_y.rows() == 0) {
    throw_input("basis pool is empty");
  }
  if (b < 1) throw_input("basis count must be at least 1");
  const Index count = std::min({b, pool_x.rows(), pool_y.rows()});

  std::mt19937_64 rng_x(derive_seed(seed, 0x62617378));
  std::mt19937_64 rng_y(derive_seed(seed, 0x62617379));
  const auto rows_x = choose_without_replacement(pool_x.rows(), count, rng_x);
  const auto rows_y = choose_without_replacement(pool_y.rows(), count, rng_y);

  SampleMatrix xb(count, pool_x.cols());
  SampleMatrix yb(count, pool_y.cols());
  for (Index l = 0; l < count; ++l) {
    xb.row(l) = pool_x.row(rows_x[l]);
    yb.row(l) = pool_y.row(rows_y[l]);
  }
  return BasisSet{std::move(xb), std::move(yb),
                  median_heuristic(pool_x, derive_seed(seed, 1)),
                  median_heuristic(pool_y, derive_seed(seed, 2))};
}

Matrix kernel_columns(const SampleMatrix& centres, const SampleMatrix& points,
                      Bandwidth sigma) {
  if (centres.cols() != points.cols()) {
    throw_input("kernel dimension mismatch");
  }
  const double scale = -1.0 / (2.0 * sigma.sigma() * sigma.sigma());
  Matrix out(centres.rows(), points.rows());
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index l = 0; l < centres.rows(); ++l) {
      out(l, i) = std::exp(scale * (centres.row(l) - points.row(i)).squaredNorm());
    }
  }
  return out;
}

FeatureColumns feature_columns(const BasisSet& basis, const SampleMatrix& xs,
                               const SampleMatrix& ys) {
  return {kernel_columns(basis.x_basis, xs, basis.sigma_x),
          kernel_columns(basis.y_basis, ys, basis.sigma_y)};
}

}  // namespace lsmi

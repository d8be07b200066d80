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

// Gaussian kernels, the median-heuristic bandwidth and the factored
// feature map phi(x, y) = k(x) o l(y) used by the ratio model.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "lsmi/common.hpp"

namespace lsmi {

/// Kernel width. Always positive and finite.
class Bandwidth {
 public:
  explicit Bandwidth(double sigma);

  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

/// Kernel centres for the x side and the y side. Row l of x_basis pairs with
/// row l of y_basis to form basis function l.
struct BasisSet {
  SampleMatrix x_basis;
  SampleMatrix y_basis;
  Bandwidth sigma_x{1.0};
  Bandwidth sigma_y{1.0};

  Index size() const { return x_basis.rows(); }
};

/// Pools above this size are subsampled (seeded) before taking the median.
inline constexpr Index kMedianSubsampleLimit = 2000;

/// 2^{-1/2} times the median Euclidean distance over unordered distinct
/// pairs of rows. Even pair counts average the two central order statistics.
Bandwidth median_heuristic(const SampleMatrix& samples,
                           std::uint64_t seed = 0);

/// exp(-|x - x2|^2 / (2 sigma^2)).
double gaussian_kernel(std::span<const double> x, std::span<const double> x2,
                       Bandwidth sigma);

/// Draws b rows without replacement from each pool independently. b is
/// clamped to the smaller pool so both sides have the same length.
/// Bandwidths come from the median heuristic over each full pool.
BasisSet sample_basis(const SampleMatrix& pool_x, const SampleMatrix& pool_y,
                      Index b, std::uint64_t seed);

/// centres (b x d), points (N x d) -> b x N kernel matrix.
Matrix kernel_columns(const SampleMatrix& centres, const SampleMatrix& points,
                      Bandwidth sigma);

struct FeatureColumns {
  Matrix K;  // b x N_x
  Matrix L;  // b x N_y
};

FeatureColumns feature_columns(const BasisSet& basis, const SampleMatrix& xs,
                               const SampleMatrix& ys);

}  // namespace lsmi

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

// Least-squares density-ratio model r(x, y) = alpha^T (k(x) o l(y)).
//
// The fit minimises 1/2 a^T H a - a^T h + lambda/2 |a|^2 where H averages
// phi phi^T over every cross pair of the pooled marginal samples and h mixes
// the paired empirical mean of phi with the plan-weighted mean over unpaired
// samples.

#pragma once

#include <span>

#include "lsmi/common.hpp"
#include "lsmi/kernels.hpp"

namespace lsmi {

class TransportPlan;

struct QuadTerm {
  Matrix H;  // b x b, symmetric PSD
};

struct LinTerm {
  Vector h;
  double beta = 1.0;
};

struct RatioModel {
  BasisSet basis;
  Vector alpha;
  double lambda = 0.0;

  /// Unclipped model value; may be negative.
  double evaluate(std::span<const double> x, std::span<const double> y) const;

  /// xs (N_x x d_x), ys (N_y x d_y) -> N_x x N_y matrix of r(x_i, y_j).
  Matrix evaluate_grid(const SampleMatrix& xs, const SampleMatrix& ys) const;

  /// r(xs_i, ys_i) for aligned rows.
  Vector evaluate_pairs(const SampleMatrix& xs, const SampleMatrix& ys) const;
};

/// H = ((K K^T) o (L L^T)) / (N_x N_y) over all columns of K_all and L_all.
QuadTerm compute_H(const Matrix& K_all, const Matrix& L_all);

/// h = beta/n sum_i phi(x_i, y_i) + (1 - beta) sum_ij pi_ij phi(x'_i, y'_j).
/// The plan term is skipped when beta == 1; the paired term when beta == 0.
LinTerm compute_h(const Matrix& K_pair, const Matrix& L_pair,
                  const Matrix& K_unpair, const Matrix& L_unpair,
                  const TransportPlan& plan, double beta);

/// Paired-only term (beta == 1); never touches a plan.
Vector paired_mean_features(const Matrix& K_pair, const Matrix& L_pair);

/// Solves (H + lambda I) alpha = h with a Cholesky factorisation. On
/// failure, retries once with lambda + 1e-10 trace(H) / b.
Vector solve_alpha(const QuadTerm& quad, const LinTerm& lin, double lambda);

double ratio_evaluate(const RatioModel& model, std::span<const double> x,
                      std::span<const double> y);

}  // namespace lsmi

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

// Alternating fit of the ratio coefficients and the transport plan, plus
// the plug-in squared-loss mutual information estimates.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lsmi/common.hpp"
#include "lsmi/density_ratio.hpp"
#include "lsmi/kernels.hpp"
#include "lsmi/transport.hpp"

namespace lsmi {

/// n paired rows plus independent marginal pools. The unpaired pools may be
/// empty only for a paired-only fit (beta == 1).
struct SampleSet {
  SampleMatrix paired_x;
  SampleMatrix paired_y;
  SampleMatrix unpaired_x;
  SampleMatrix unpaired_y;

  Index n() const { return paired_x.rows(); }
  Index n_x() const { return unpaired_x.rows(); }
  Index n_y() const { return unpaired_y.rows(); }
  Index dim_x() const;
  Index dim_y() const;

  /// Paired rows followed by unpaired rows.
  SampleMatrix pooled_x() const;
  SampleMatrix pooled_y() const;

  /// Throws on inconsistent shapes.
  void validate() const;
};

struct EstimatorConfig {
  Index b = 200;
  double epsilon = 0.3;
  double lambda = 0.01;
  double beta = 0.8;
  std::size_t max_outer_iters = 20;  // T
  double eta = 1e-9;
  std::uint64_t seed = 0;
  std::size_t sinkhorn_max_iters = SinkhornParams{}.max_inner_iters;
  double sinkhorn_tol = SinkhornParams{}.marginal_tol;

  SinkhornParams sinkhorn() const {
    return {epsilon, sinkhorn_max_iters, sinkhorn_tol};
  }
  void validate() const;
};

struct IterationTiming {
  double alpha_seconds = 0.0;
  double cost_seconds = 0.0;
  double sinkhorn_seconds = 0.0;
  double h_seconds = 0.0;
  std::size_t sinkhorn_iterations = 0;

  double total() const {
    return alpha_seconds + cost_seconds + sinkhorn_seconds + h_seconds;
  }
};

struct FitResult {
  RatioModel model;
  TransportPlan plan;
  /// [0] = J(Pi0, alpha1); [t] = J after the t-th full (alpha, Pi) update.
  std::vector<double> objective_trace;
  std::size_t iterations_run = 0;
  bool converged = false;
  /// Inner solves that stopped at the iteration cap.
  std::size_t sinkhorn_warnings = 0;
  double setup_seconds = 0.0;
  std::vector<IterationTiming> timings;
};

/// J = 1/2 a^T H a - a^T h + eps * H(Pi) + lambda/2 |a|^2.
double objective(const QuadTerm& quad, const LinTerm& lin, const Vector& alpha,
                 const TransportPlan& plan, double lambda, double epsilon);

/// Samples the basis from the pooled data and runs the alternating fit.
FitResult fit(const SampleSet& data, const EstimatorConfig& config);

/// Same, with a caller-supplied basis (cross-validation freezes it).
FitResult fit_with_basis(const SampleSet& data, const EstimatorConfig& config,
                         const BasisSet& basis);

/// 1/(2 N_x N_y) sum over every pooled cross pair of (r - 1)^2.
double smi_estimate(const RatioModel& model, const SampleSet& data);

/// (beta/2n) sum_i r(x_i, y_i) + ((1 - beta)/2) sum_ij pi_ij r(x'_i, y'_j) - 1/2.
double smi_estimate_paired(const RatioModel& model, const TransportPlan& plan,
                           const SampleSet& data, double beta);

}  // namespace lsmi

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

#include "lsmi/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace lsmi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SampleMatrix stack_rows(const SampleMatrix& top, const SampleMatrix& bottom) {
  const Index cols = top.rows() > 0 ? top.cols() : bottom.cols();
  SampleMatrix out(top.rows() + bottom.rows(), cols);
  if (top.rows() > 0) out.topRows(top.rows()) = top;
  if (bottom.rows() > 0) out.bottomRows(bottom.rows()) = bottom;
  return out;
}

}  // namespace

Index SampleSet::dim_x() const {
  return paired_x.rows() > 0 ? paired_x.cols() : unpaired_x.cols();
}

Index SampleSet::dim_y() const {
  return paired_y.rows() > 0 ? paired_y.cols() : unpaired_y.cols();
}

SampleMatrix SampleSet::pooled_x() const { return stack_rows(paired_x, unpaired_x); }

SampleMatrix SampleSet::pooled_y() const { return stack_rows(paired_y, unpaired_y); }

void SampleSet::validate() const {
  if (paired_x.rows() != paired_y.rows()) {
    throw_input("paired x and y row counts differ");
  }
  if (paired_x.rows() > 0 && unpaired_x.rows() > 0 &&
      paired_x.cols() != unpaired_x.cols()) {
    throw_input("x dimension differs between paired and unpaired samples");
  }
  if (paired_y.rows() > 0 && unpaired_y.rows() > 0 &&
      paired_y.cols() != unpaired_y.cols()) {
    throw_input("y dimension differs between paired and unpaired samples");
  }
  if ((unpaired_x.rows() == 0) != (unpaired_y.rows() == 0)) {
    throw_input("only one unpaired pool is empty");
  }
  if (n() + n_x() < 1 || n() + n_y() < 1) throw_input("no samples");
  if (dim_x() < 1 || dim_y() < 1) throw_input("samples have no features");
  if (!paired_x.allFinite() || !paired_y.allFinite() ||
      !unpaired_x.allFinite() || !unpaired_y.allFinite()) {
    throw_input("non-finite sample values");
  }
}

void EstimatorConfig::validate() const {
  if (b < 1) throw_input("basis count must be at least 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw_input("epsilon must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw_input("lambda must be nonnegative");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw_input("beta must lie in [0, 1]");
  if (max_outer_iters < 1) throw_input("T must be at least 1");
  if (!(eta > 0.0)) throw_input("eta must be positive");
  if (!(sinkhorn_tol > 0.0)) throw_input("marginal tolerance must be positive");
}

double objective(const QuadTerm& quad, const LinTerm& lin, const Vector& alpha,
                 const TransportPlan& plan, double lambda, double epsilon) {
  if (quad.H.rows() != alpha.size() || lin.h.size() != alpha.size()) {
    throw_input("objective shape mismatch");
  }
  return 0.5 * alpha.dot(quad.H * alpha) - alpha.dot(lin.h) +
         epsilon * plan_entropy(plan) + 0.5 * lambda * alpha.squaredNorm();
}

FitResult fit(const SampleSet& data, const EstimatorConfig& config) {
  data.validate();
  config.validate();
  const BasisSet basis = sample_basis(data.pooled_x(), data.pooled_y(),
                                      config.b, config.seed);
  return fit_with_basis(data, config, basis);
}

FitResult fit_with_basis(const SampleSet& data, const EstimatorConfig& config,
                         const BasisSet& basis) {
  data.validate();
  config.validate();
  const Index n = data.n();
  const Index nx = data.n_x();
  const Index ny = data.n_y();
  const double beta = config.beta;
  const bool paired_only = nx == 0;
  if (beta > 0.0 && n == 0) throw_input("no paired samples");
  if (paired_only && beta != 1.0) {
    throw_input("unpaired pools are empty; only beta = 1 is allowed");
  }

  FitResult result;
  const auto setup_start = Clock::now();
  const FeatureColumns all =
      feature_columns(basis, data.pooled_x(), data.pooled_y());
  const QuadTerm quad = compute_H(all.K, all.L);
  const Matrix K_pair = all.K.leftCols(n);
  const Matrix L_pair = all.L.leftCols(n);
  const Matrix K_unpair = all.K.rightCols(nx);
  const Matrix L_unpair = all.L.rightCols(ny);
  result.setup_seconds = seconds_since(setup_start);

  TransportPlan plan = TransportPlan::uniform(nx, ny);
  LinTerm lin = paired_only
                    ? LinTerm{paired_mean_features(K_pair, L_pair), beta}
                    : compute_h(K_pair, L_pair, K_unpair, L_unpair, plan, beta);
  const SinkhornParams sinkhorn = config.sinkhorn();
  DualPotentials potentials;
  Vector alpha;

  for (std::size_t t = 1; t <= config.max_outer_iters; ++t) {
    IterationTiming timing;
    auto start = Clock::now();
    alpha = solve_alpha(quad, lin, config.lambda);
    timing.alpha_seconds = seconds_since(start);
    if (t == 1) {
      result.objective_trace.push_back(
          objective(quad, lin, alpha, plan, config.lambda, config.epsilon));
    }
    result.iterations_run = t;
    if (paired_only) {
      result.timings.push_back(timing);
      result.converged = true;
      break;
    }

    start = Clock::now();
    const CostMatrix cost = cost_matrix(alpha, K_unpair, L_unpair);
    timing.cost_seconds = seconds_since(start);

    start = Clock::now();
    SinkhornStats stats;
    TransportPlan next = sinkhorn_solve(cost, beta, sinkhorn, &potentials, &stats);
    timing.sinkhorn_seconds = seconds_since(start);
    timing.sinkhorn_iterations = stats.iterations;
    if (!next.marginals_reached()) ++result.sinkhorn_warnings;

    start = Clock::now();
    lin = compute_h(K_pair, L_pair, K_unpair, L_unpair, next, beta);
    timing.h_seconds = seconds_since(start);

    result.objective_trace.push_back(
        objective(quad, lin, alpha, next, config.lambda, config.epsilon));
    result.timings.push_back(timing);

    const double gap = (next.pi() - plan.pi()).norm();
    plan = std::move(next);
    if (gap <= config.eta) {
      result.converged = true;
      break;
    }
  }

  result.model = RatioModel{basis, std::move(alpha), config.lambda};
  result.plan = std::move(plan);
  return result;
}

double smi_estimate(const RatioModel& model, const SampleSet& data) {
  data.validate();
  const FeatureColumns all =
      feature_columns(model.basis, data.pooled_x(), data.pooled_y());
  if (all.K.rows() != model.alpha.size()) throw_input("model shape mismatch");
  const double nx = static_cast<double>(all.K.cols());
  const double ny = static_cast<double>(all.L.cols());
  // mean of r^2 and of r over every cross pair, in factored form.
  const Matrix kk = all.K * all.K.transpose() / nx;
  const Matrix ll = all.L * all.L.transpose() / ny;
  const Vector& a = model.alpha;
  const double mean_sq = a.dot(kk.cwiseProduct(ll) * a);
  const Vector kbar = all.K.rowwise().mean();
  const Vector lbar = all.L.rowwise().mean();
  const double mean_r = a.dot(kbar.cwiseProduct(lbar));
  return std::max(0.0, 0.5 * (mean_sq - 2.0 * mean_r + 1.0));
}

double smi_estimate_paired(const RatioModel& model, const TransportPlan& plan,
                           const SampleSet& data, double beta) {
  data.validate();
  if (!(beta >= 0.0 && beta <= 1.0)) throw_input("beta must lie in [0, 1]");
  if (beta > 0.0 && data.n() == 0) throw_input("no paired samples");
  if (plan.rows() != data.n_x() || plan.cols() != data.n_y()) {
    throw_input("plan shape does not match unpaired samples");
  }
  double value = -0.5;
  if (beta > 0.0) {
    value += beta / (2.0 * static_cast<double>(data.n())) *
             model.evaluate_pairs(data.paired_x, data.paired_y).sum();
  }
  if (beta < 1.0 && plan.rows() > 0) {
    const Matrix K = kernel_columns(model.basis.x_basis, data.unpaired_x,
                                    model.basis.sigma_x);
    const Matrix L = kernel_columns(model.basis.y_basis, data.unpaired_y,
                                    model.basis.sigma_y);
    const double weighted =
        model.alpha.dot((K * plan.pi()).cwiseProduct(L).rowwise().sum());
    value += 0.5 * (1.0 - beta) * weighted;
  }
  return value;
}

}  // namespace lsmi

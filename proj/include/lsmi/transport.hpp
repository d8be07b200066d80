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

// Entropic plan sub-problem:
//
//   min_Pi  -(1 - beta) <Pi, C> + eps * sum_ij pi_ij (log pi_ij - 1)
//   s.t.    Pi 1 = 1/n_x,  Pi^T 1 = 1/n_y
//
// The reward enters with a positive sign, so the Gibbs kernel is
// exp(+(1 - beta) C / eps). Solved by Sinkhorn scaling with dual potentials
// (f, g): Pi_ij = exp((f_i + g_j + (1 - beta) C_ij) / eps).

#pragma once

#include <cstddef>

#include "lsmi/common.hpp"

namespace lsmi {

/// Nonnegative n_x x n_y coupling with uniform target marginals.
class TransportPlan {
 public:
  TransportPlan() = default;
  explicit TransportPlan(Matrix pi, bool marginals_reached = true);

  static TransportPlan uniform(Index n_x, Index n_y);

  const Matrix& pi() const { return pi_; }
  Index rows() const { return pi_.rows(); }
  Index cols() const { return pi_.cols(); }

  /// max over rows and columns of |marginal - target|.
  double max_marginal_violation() const;

  /// False when the solver stopped at its iteration cap before reaching the
  /// marginal tolerance. The plan is still usable.
  bool marginals_reached() const { return marginals_reached_; }

 private:
  Matrix pi_;
  bool marginals_reached_ = true;
};

struct CostMatrix {
  Matrix C;  // n_x x n_y, rank <= b
};

struct SinkhornParams {
  double epsilon = 0.3;
  std::size_t max_inner_iters = 1000;
  double marginal_tol = 1e-12;
};

/// Dual potentials carried between calls for warm starts.
struct DualPotentials {
  Vector f;
  Vector g;

  bool matches(Index n_x, Index n_y) const {
    return f.size() == n_x && g.size() == n_y;
  }
};

/// C[i, j] = sum_l alpha_l K[l, i] L[l, j].
CostMatrix cost_matrix(const Vector& alpha, const Matrix& K_unpair,
                       const Matrix& L_unpair);

struct SinkhornStats {
  std::size_t iterations = 0;
  std::size_t absorptions = 0;
  double violation = 0.0;
};

/// Solves the entropic plan problem. `warm` (optional) seeds the dual
/// potentials and receives the final ones.
TransportPlan sinkhorn_solve(const CostMatrix& cost, double beta,
                             const SinkhornParams& params,
                             DualPotentials* warm = nullptr,
                             SinkhornStats* stats = nullptr);

/// sum_ij pi_ij (log pi_ij - 1), with 0 log 0 = 0.
double plan_entropy(const TransportPlan& plan);

}  // namespace lsmi

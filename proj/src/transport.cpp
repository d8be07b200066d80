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

#include "lsmi/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lsmi {

TransportPlan::TransportPlan(Matrix pi, bool marginals_reached)
    : pi_(std::move(pi)), marginals_reached_(marginals_reached) {}

TransportPlan TransportPlan::uniform(Index n_x, Index n_y) {
  if (n_x < 0 || n_y < 0) throw_input("negative plan shape");
  if (n_x == 0 || n_y == 0) return TransportPlan(Matrix(n_x, n_y));
  return TransportPlan(Matrix::Constant(
      n_x, n_y, 1.0 / (static_cast<double>(n_x) * static_cast<double>(n_y))));
}

double TransportPlan::max_marginal_violation() const {
  if (pi_.size() == 0) return 0.0;
  const double row_target = 1.0 / static_cast<double>(pi_.rows());
  const double col_target = 1.0 / static_cast<double>(pi_.cols());
  const double row_err =
      (pi_.rowwise().sum().array() - row_target).abs().maxCoeff();
  const double col_err =
      (pi_.colwise().sum().array() - col_target).abs().maxCoeff();
  return std::max(row_err, col_err);
}

CostMatrix cost_matrix(const Vector& alpha, const Matrix& K_unpair,
                       const Matrix& L_unpair) {
  if (K_unpair.rows() != alpha.size() || L_unpair.rows() != alpha.size()) {
    throw_input("cost matrix shape mismatch");
  }
  return {(alpha.asDiagonal() * K_unpair).transpose() * L_unpair};
}

namespace {

// Absorb scalings into the potentials once |log u| or |log v| passes this.
constexpr double kAbsorbLog = 100.0;

class StabilizedSinkhorn {
 public:
  StabilizedSinkhorn(const Matrix& reward, double eps, Vector f, Vector g)
      : M_(reward),
        eps_(eps),
        f_(std::move(f)),
        g_(std::move(g)),
        log_a_(-std::log(static_cast<double>(reward.rows()))),
        log_b_(-std::log(static_cast<double>(reward.cols()))),
        a_(1.0 / static_cast<double>(reward.rows())),
        b_(1.0 / static_cast<double>(reward.cols())) {}

  bool run(std::size_t max_iters, double tol, SinkhornStats& stats) {
    log_step();
    rebuild();
    Vector u = Vector::Ones(M_.rows());
    Vector v = Vector::Ones(M_.cols());
    Vector Gv = G_ * v;
    bool reached = false;

    for (std::size_t it = 0; it < max_iters; ++it) {
      if (!positive_finite(Gv)) {
        absorb(u, v);
        recover(u, v, Gv);
      }
      u = a_ * Gv.cwiseInverse();
      Vector Gtu = G_.transpose() * u;
      if (!positive_finite(Gtu)) {
        absorb(u, v);
        recover(u, v, Gv);
        continue;
      }
      v = b_ * Gtu.cwiseInverse();
      Gv = G_ * v;

      stats.iterations = it + 1;
      stats.violation = (u.cwiseProduct(Gv).array() - a_).abs().maxCoeff();
      if (stats.violation <= tol) {
        reached = true;
        break;
      }
      const double spread =
          std::max(u.array().log().abs().maxCoeff(),
                   v.array().log().abs().maxCoeff());
      if (!(spread <= kAbsorbLog)) {
        absorb(u, v);
        ++stats.absorptions;
        rebuild();
        u.setOnes();
        v.setOnes();
        Gv = G_ * v;
      }
    }
    absorb(u, v);
    return reached;
  }

  Matrix plan() const {
    Matrix pi(M_.rows(), M_.cols());
    for (Index j = 0; j < M_.cols(); ++j) {
      for (Index i = 0; i < M_.rows(); ++i) {
        pi(i, j) = std::exp((f_(i) + g_(j) + M_(i, j)) / eps_);
      }
    }
    return pi;
  }

  Vector& f() { return f_; }
  Vector& g() { return g_; }

 private:
  static bool positive_finite(const Vector& v) {
    return v.allFinite() && v.minCoeff() > 0.0;
  }

  void absorb(const Vector& u, const Vector& v) {
    f_.array() += eps_ * u.array().log();
    g_.array() += eps_ * v.array().log();
  }

  void recover(Vector& u, Vector& v, Vector& Gv) {
    log_step();
    rebuild();
    u.setOnes();
    v.setOnes();
    Gv = G_ * v;
  }

  void rebuild() {
    G_.resize(M_.rows(), M_.cols());
    for (Index j = 0; j < M_.cols(); ++j) {
      for (Index i = 0; i < M_.rows(); ++i) {
        G_(i, j) = std::exp((f_(i) + g_(j) + M_(i, j)) / eps_);
      }
    }
  }

  // One exact log-domain row update followed by a column update. Used to
  // start and to recover from under/overflow of the scaled kernel.
  void log_step() {
    const Index nx = M_.rows();
    const Index ny = M_.cols();
    Vector row_max = Vector::Constant(nx, -std::numeric_limits<double>::infinity());
    for (Index j = 0; j < ny; ++j) {
      for (Index i = 0; i < nx; ++i) {
        row_max(i) = std::max(row_max(i), (g_(j) + M_(i, j)) / eps_);
      }
    }
    Vector row_sum = Vector::Zero(nx);
    for (Index j = 0; j < ny; ++j) {
      for (Index i = 0; i < nx; ++i) {
        row_sum(i) += std::exp((g_(j) + M_(i, j)) / eps_ - row_max(i));
      }
    }
    for (Index i = 0; i < nx; ++i) {
      f_(i) = eps_ * (log_a_ - row_max(i) - std::log(row_sum(i)));
    }
    for (Index j = 0; j < ny; ++j) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Index i = 0; i < nx; ++i) {
        mx = std::max(mx, (f_(i) + M_(i, j)) / eps_);
      }
      double s = 0.0;
      for (Index i = 0; i < nx; ++i) {
        s += std::exp((f_(i) + M_(i, j)) / eps_ - mx);
      }
      g_(j) = eps_ * (log_b_ - mx - std::log(s));
    }
  }

  const Matrix& M_;
  double eps_;
  Vector f_;
  Vector g_;
  Matrix G_;
  double log_a_;
  double log_b_;
  double a_;
  double b_;
};

}  // namespace

TransportPlan sinkhorn_solve(const CostMatrix& cost, double beta,
                             const SinkhornParams& params, DualPotentials* warm,
                             SinkhornStats* stats) {
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw_input("epsilon must be positive");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw_input("beta must lie in [0, 1]");
  const Matrix& C = cost.C;
  if (!C.allFinite()) throw_input("non-finite cost entries");
  const Index nx = C.rows();
  const Index ny = C.cols();
  if (nx == 0 || ny == 0) throw_input("empty cost matrix");

  SinkhornStats local;
  SinkhornStats& st = stats ? *stats : local;
  st = SinkhornStats{};

  // A single row or column is pinned by the marginals; beta == 1 removes
  // the reward and leaves the entropy maximiser.
  if (nx == 1 || ny == 1 || beta == 1.0) {
    if (warm) *warm = DualPotentials{};
    return TransportPlan::uniform(nx, ny);
  }

  const Matrix reward = (1.0 - beta) * C;
  Vector f = Vector::Zero(nx);
  Vector g = Vector::Zero(ny);
  if (warm && warm->matches(nx, ny)) {
    f = warm->f;
    g = warm->g;
  }

  StabilizedSinkhorn solver(reward, params.epsilon, std::move(f), std::move(g));
  const bool reached = solver.run(params.max_inner_iters, params.marginal_tol, st);
  if (warm) {
    warm->f = solver.f();
    warm->g = solver.g();
  }
  return TransportPlan(solver.plan(), reached);
}

double plan_entropy(const TransportPlan& plan) {
  double total = 0.0;
  const Matrix& pi = plan.pi();
  for (Index j = 0; j < pi.cols(); ++j) {
    for (Index i = 0; i < pi.rows(); ++i) {
      const double p = pi(i, j);
      if (p > 0.0) total += p * (std::log(p) - 1.0);
    }
  }
  return total;
}

}  // namespace lsmi

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

#include "lsmi/density_ratio.hpp"

#include <cmath>

#include "lsmi/transport.hpp"

namespace lsmi {

namespace {

Eigen::Map<const Eigen::RowVectorXd> as_row(std::span<const double> v) {
  return {v.data(), static_cast<Index>(v.size())};
}

Vector kernel_vector(const SampleMatrix& centres, std::span<const double> x,
                     Bandwidth sigma) {
  if (static_cast<Index>(x.size()) != centres.cols()) {
    throw_input("ratio model dimension mismatch");
  }
  const double scale = -1.0 / (2.0 * sigma.sigma() * sigma.sigma());
  Vector k(centres.rows());
  const auto row = as_row(x);
  for (Index l = 0; l < centres.rows(); ++l) {
    k(l) = std::exp(scale * (centres.row(l) - row).squaredNorm());
  }
  return k;
}

}  // namespace

double RatioModel::evaluate(std::span<const double> x,
                            std::span<const double> y) const {
  const Vector k = kernel_vector(basis.x_basis, x, basis.sigma_x);
  const Vector l = kernel_vector(basis.y_basis, y, basis.sigma_y);
  return alpha.dot(k.cwiseProduct(l));
}

Matrix RatioModel::evaluate_grid(const SampleMatrix& xs,
                                 const SampleMatrix& ys) const {
  const Matrix K = kernel_columns(basis.x_basis, xs, basis.sigma_x);
  const Matrix L = kernel_columns(basis.y_basis, ys, basis.sigma_y);
  return (alpha.asDiagonal() * K).transpose() * L;
}

Vector RatioModel::evaluate_pairs(const SampleMatrix& xs,
                                  const SampleMatrix& ys) const {
  if (xs.rows() != ys.rows()) throw_input("pair count mismatch");
  const Matrix K = kernel_columns(basis.x_basis, xs, basis.sigma_x);
  const Matrix L = kernel_columns(basis.y_basis, ys, basis.sigma_y);
  return K.cwiseProduct(L).transpose() * alpha;
}

QuadTerm compute_H(const Matrix& K_all, const Matrix& L_all) {
  if (K_all.rows() != L_all.rows()) throw_input("basis count mismatch in H");
  if (K_all.cols() == 0 || L_all.cols() == 0) {
    throw_input("H needs at least one sample per side");
  }
  Matrix kk = K_all * K_all.transpose();
  const Matrix ll = L_all * L_all.transpose();
  kk = kk.cwiseProduct(ll) /
       (static_cast<double>(K_all.cols()) * static_cast<double>(L_all.cols()));
  // Symmetrise against rounding in the two products.
  return {0.5 * (kk + kk.transpose())};
}

Vector paired_mean_features(const Matrix& K_pair, const Matrix& L_pair) {
  if (K_pair.rows() != L_pair.rows() || K_pair.cols() != L_pair.cols()) {
    throw_input("paired feature shape mismatch");
  }
  if (K_pair.cols() == 0) throw_input("no paired samples");
  return K_pair.cwiseProduct(L_pair).rowwise().sum() /
         static_cast<double>(K_pair.cols());
}

LinTerm compute_h(const Matrix& K_pair, const Matrix& L_pair,
                  const Matrix& K_unpair, const Matrix& L_unpair,
                  const TransportPlan& plan, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw_input("beta must lie in [0, 1]");
  const Index b = K_pair.rows();
  if (L_pair.rows() != b || K_unpair.rows() != b || L_unpair.rows() != b) {
    throw_input("basis count mismatch in h");
  }
  if (plan.rows() != K_unpair.cols() || plan.cols() != L_unpair.cols()) {
    throw_input("plan shape does not match unpaired samples");
  }

  Vector h = Vector::Zero(b);
  if (beta > 0.0) {
    if (K_pair.cols() == 0) throw_input("no paired samples");
    h += beta * paired_mean_features(K_pair, L_pair);
  }
  if (beta < 1.0 && plan.rows() > 0 && plan.cols() > 0) {
    // (K Pi) is b x n_y; weight by L column-wise and sum over j.
    const Matrix kp = K_unpair * plan.pi();
    h += (1.0 - beta) * kp.cwiseProduct(L_unpair).rowwise().sum();
  }
  return {std::move(h), beta};
}

Vector solve_alpha(const QuadTerm& quad, const LinTerm& lin, double lambda) {
  const Index b = quad.H.rows();
  if (quad.H.cols() != b || lin.h.size() != b) {
    throw_input("ridge system shape mismatch");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw_input("lambda must be nonnegative");
  }

  auto attempt = [&](double ridge, Vector& out) {
    Matrix A = quad.H;
    A.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success) return false;
    out = llt.solve(lin.h);
    if (!out.allFinite()) return false;
    // Reject near-singular factorisations that "succeed" numerically.
    const double resid = (A * out - lin.h).norm();
    return resid <= 1e-8 * std::max(lin.h.norm(), 1e-300);
  };

  Vector alpha;
  if (attempt(lambda, alpha)) return alpha;
  // An unregularised system is solved exactly or not at all.
  if (lambda == 0.0) throw_numerical("singular H; increase lambda");
  const double jitter = 1e-10 * quad.H.trace() / static_cast<double>(b);
  if (jitter > 0.0 && attempt(lambda + jitter, alpha)) return alpha;
  throw_numerical("singular H; increase lambda");
}

double ratio_evaluate(const RatioModel& model, std::span<const double> x,
                      std::span<const double> y) {
  return model.evaluate(x, y);
}

}  // namespace lsmi

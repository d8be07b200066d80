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

// Independent reference computations used as test oracles. Each one takes
// the slow, direct route so it shares no code with the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lsmi/common.hpp"

namespace lsmi::oracle {

// Gaussian elimination with partial pivoting.
inline Vector dense_solve(Matrix A, Vector b) {
  const Index n = A.rows();
  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index r = k + 1; r < n; ++r) {
      if (std::abs(A(r, k)) > std::abs(A(piv, k))) piv = r;
    }
    A.row(k).swap(A.row(piv));
    std::swap(b(k), b(piv));
    for (Index r = k + 1; r < n; ++r) {
      const double f = A(r, k) / A(k, k);
      for (Index c = k; c < n; ++c) A(r, c) -= f * A(k, c);
      b(r) -= f * b(k);
    }
  }
  Vector x(n);
  for (Index k = n - 1; k >= 0; --k) {
    double s = b(k);
    for (Index c = k + 1; c < n; ++c) s -= A(k, c) * x(c);
    x(k) = s / A(k, k);
  }
  return x;
}

inline Matrix loop_H(const Matrix& K, const Matrix& L) {
  const Index b = K.rows();
  Matrix H = Matrix::Zero(b, b);
  for (Index l = 0; l < b; ++l) {
    for (Index m = 0; m < b; ++m) {
      double s = 0.0;
      for (Index i = 0; i < K.cols(); ++i) {
        for (Index j = 0; j < L.cols(); ++j) {
          s += K(l, i) * L(l, j) * K(m, i) * L(m, j);
        }
      }
      H(l, m) = s / static_cast<double>(K.cols() * L.cols());
    }
  }
  return H;
}

inline Vector loop_h(const Matrix& Kp, const Matrix& Lp, const Matrix& Ku,
              const Matrix& Lu, const Matrix& pi, double beta) {
  const Index b = Kp.rows();
  Vector h = Vector::Zero(b);
  for (Index l = 0; l < b; ++l) {
    double paired = 0.0;
    for (Index i = 0; i < Kp.cols(); ++i) paired += Kp(l, i) * Lp(l, i);
    double planned = 0.0;
    for (Index i = 0; i < Ku.cols(); ++i) {
      for (Index j = 0; j < Lu.cols(); ++j) planned += pi(i, j) * Ku(l, i) * Lu(l, j);
    }
    h(l) = beta * paired / static_cast<double>(Kp.cols()) + (1.0 - beta) * planned;
  }
  return h;
}

/// Minimises -<R, P> + eps sum p (log p - 1) over plans with uniform
/// marginals. The optimum has the form P_ij = exp((R_ij + f_i + g_j) / eps);
/// (f, g) minimise the smooth convex dual
///   eps sum exp((R_ij + f_i + g_j) / eps) - sum_i f_i / n - sum_j g_j / m,
/// which is solved here by full Newton steps with g_{m-1} fixed at 0.
inline Matrix newton_plan(const Matrix& R, double eps) {
  const Index n = R.rows();
  const Index m = R.cols();
  const Index dims = n + m - 1;
  const double a = 1.0 / static_cast<double>(n);
  const double b = 1.0 / static_cast<double>(m);
  Vector f(n);
  for (Index i = 0; i < n; ++i) f(i) = eps * std::log(a) - R.row(i).maxCoeff();
  Vector g = Vector::Zero(m);
  auto plan = [&](const Vector& ff, const Vector& gg) {
    Matrix P(n, m);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) P(i, j) = std::exp((R(i, j) + ff(i) + gg(j)) / eps);
    }
    return P;
  };
  auto dual = [&](const Vector& ff, const Vector& gg) {
    return eps * plan(ff, gg).sum() - a * ff.sum() - b * gg.sum();
  };
  auto gradient = [&](const Matrix& P) {
    Vector grad(dims);
    grad.head(n) = P.rowwise().sum().array() - a;
    grad.tail(m - 1) = P.colwise().sum().head(m - 1).transpose().array() - b;
    return grad;
  };
  for (int iter = 0; iter < 200; ++iter) {
    const Matrix P = plan(f, g);
    const Vector grad = gradient(P);
    if (grad.cwiseAbs().maxCoeff() < 1e-15) break;
    Matrix H = Matrix::Zero(dims, dims);
    for (Index i = 0; i < n; ++i) H(i, i) = P.row(i).sum() / eps;
    for (Index j = 0; j + 1 < m; ++j) {
      H(n + j, n + j) = P.col(j).sum() / eps;
      for (Index i = 0; i < n; ++i) {
        H(i, n + j) = P(i, j) / eps;
        H(n + j, i) = P(i, j) / eps;
      }
    }
    const Vector step = -dense_solve(H, grad);
    const double d0 = dual(f, g);
    const double g0 = grad.norm();
    const double decrease = grad.dot(step);
    double s = 1.0;
    for (; s > 1e-40; s *= 0.5) {
      Vector ff = f + s * step.head(n);
      Vector gg = g;
      gg.head(m - 1) += s * step.tail(m - 1);
      const double d1 = dual(ff, gg);
      // Armijo; near the optimum the value stops resolving, so a full step
      // that keeps the value within rounding and shrinks the gradient passes.
      const bool armijo = d1 <= d0 + 1e-4 * s * decrease;
      const bool flat = s == 1.0 && d1 <= d0 + 1e-14 * std::abs(d0) &&
                        gradient(plan(ff, gg)).norm() < g0;
      if (armijo || flat) {
        f = ff;
        g = gg;
        break;
      }
    }
    if (s <= 1e-40) break;
  }
  return plan(f, g);
}

/// Best total weight over all one-to-one assignments of rows to columns
/// (rows <= cols), by enumerating column permutations.
inline double brute_force_best_weight(const Matrix& W) {
  std::vector<Index> cols(static_cast<std::size_t>(W.cols()));
  std::iota(cols.begin(), cols.end(), Index{0});
  double best = -INFINITY;
  do {
    double s = 0.0;
    for (Index i = 0; i < W.rows(); ++i) s += W(i, cols[static_cast<std::size_t>(i)]);
    best = std::max(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

}  // namespace lsmi::oracle

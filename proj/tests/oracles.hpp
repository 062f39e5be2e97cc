// Copyright 2026 The leafrecon Authors.
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

// Straightforward reference computations the tests compare against. None of
// them share code paths with the library beyond the plain data types.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "leafrecon/core.hpp"
#include "leafrecon/local_solver.hpp"

namespace leafrecon::test {

/// ids sorted by (distance, id) over a linear scan; first k.
inline std::vector<std::size_t> brute_knn(std::span<const Vec3> pts, const Vec3& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < pts.size(); ++i) d.emplace_back((pts[i] - q).squaredNorm(), i);
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
  return out;
}

/// Nearest id, ties to the lower id.
inline std::size_t brute_nearest(std::span<const Vec3> pts, const Vec3& q) {
  std::size_t best = 0;
  double bestD = INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - q).squaredNorm();
    if (d < bestD) {
      bestD = d;
      best = i;
    }
  }
  return best;
}

inline std::vector<std::size_t> brute_radius(std::span<const Vec3> pts, const Vec3& q, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[i] - q).norm() <= r) out.push_back(i);
  }
  return out;
}

inline double brute_min_distance(std::span<const Vec3> pts, const Vec3& q) {
  double best = INFINITY;
  for (const auto& p : pts) best = std::min(best, (p - q).norm());
  return best;
}

/// Monomial matrix in raw coordinates, built independently of the library.
inline Eigen::MatrixXd raw_polynomial_matrix(std::span<const Vec3> sites, int maxDegree) {
  std::vector<std::array<int, 3>> ex;
  for (int deg = 0; deg <= maxDegree; ++deg) {
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) ex.push_back({a, b, deg - a - b});
    }
  }
  Eigen::MatrixXd P(static_cast<Eigen::Index>(sites.size()), static_cast<Eigen::Index>(ex.size()));
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t k = 0; k < ex.size(); ++k) {
      P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          std::pow(sites[i].x(), ex[k][0]) * std::pow(sites[i].y(), ex[k][1]) *
          std::pow(sites[i].z(), ex[k][2]);
    }
  }
  return P;
}

/// Influence matrix built one column at a time: solve the full saddle
/// system against each unit vector and read off the fitted values.
inline Eigen::MatrixXd brute_influence(std::span<const Vec3> sites, const PhsKernel& kernel,
                                       double rho) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  const Eigen::MatrixXd P = raw_polynomial_matrix(sites, kernel.order() - 1);
  const Eigen::Index q = P.cols();
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = (sites[static_cast<std::size_t>(i)] - sites[static_cast<std::size_t>(j)]).norm();
      const int p = kernel.power();
      A(i, j) = r == 0.0 ? 0.0 : (p % 2 == 0 ? std::pow(r, p) * std::log(r) : std::pow(r, p));
    }
  }
  const double shift = rho * static_cast<double>(n) / kernel.theta();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + q, n + q);
  M.topLeftCorner(n, n) = A + shift * Eigen::MatrixXd::Identity(n, n);
  M.topRightCorner(n, q) = P;
  M.bottomLeftCorner(q, n) = P.transpose();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  Eigen::MatrixXd B(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + q);
    rhs[j] = 1.0;
    const Eigen::VectorXd sol = lu.solve(rhs);
    B.col(j) = A * sol.head(n) + P * sol.tail(q);
  }
  return B;
}

inline double brute_force_gcv(std::span<const Vec3> sites, std::span<const double> values,
                              const PhsKernel& kernel, double rho) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  const Eigen::MatrixXd IB = Eigen::MatrixXd::Identity(n, n) - brute_influence(sites, kernel, rho);
  const Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
  const double tr = IB.trace();
  return static_cast<double>(n) * (IB * f).squaredNorm() / (tr * tr);
}

}  // namespace leafrecon::test

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

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "leafrecon/core.hpp"

namespace leafrecon {

/// Polyharmonic kernel of order m in d dimensions.
///
/// phi(r) = r^(2m-d), times log r when 2m-d is even. theta() is the signed
/// constant of the fundamental solution of the m-iterated Laplacian; the
/// smoothing term on the diagonal is rho*N/theta.
class PhsKernel {
 public:
  PhsKernel() = default;
  /// Throws UsageError unless 2m - d > 0 and m, d >= 1.
  PhsKernel(int order, int dimension);

  int order() const noexcept { return order_; }
  int dimension() const noexcept { return dimension_; }
  int power() const noexcept { return 2 * order_ - dimension_; }
  bool has_log() const noexcept { return power() % 2 == 0; }
  double theta() const;

  double operator()(double r) const;

  /// d/dr and second-derivative helpers in the form used by the gradient
  /// and Hessian of x -> phi(|x - y|): grad = g1 * (x-y), hess = g1 I +
  /// g2 (x-y)(x-y)^T. Both are zero at r = 0.
  void radial_derivatives(double r, double& g1, double& g2) const;

  /// Number of monomials of total degree <= m-1 in d variables.
  std::size_t polynomial_dimension() const;

 private:
  int order_ = 3;
  int dimension_ = 3;
};

double kernel_eval(const PhsKernel& kernel, double r);

using Exponent = std::array<int, 3>;

/// Monomials of total degree <= maxDegree in three variables, graded, and
/// lexicographically descending inside each degree: 1, x, y, z, x^2, xy, ...
std::vector<Exponent> polynomial_basis(int maxDegree);

/// The dense smoothed saddle-point system
///   [A + shift I, P; P^T, 0] [lambda; a] = [f; 0],  shift = rho N / theta.
struct SaddleSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd P;
  double shift = 0.0;
  Eigen::VectorXd f;

  Eigen::MatrixXd matrix() const;
  Eigen::VectorXd rhs() const;
};

/// Assembles the system in the coordinates given (no recentring).
/// Requires a 3-D kernel and at least as many sites as basis monomials.
SaddleSystem assemble_system(std::span<const Vec3> sites, std::span<const double> values,
                             const PhsKernel& kernel, double rho);

/// Affine frame x -> (x - center) / scale applied before assembly.
struct FitFrame {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;
};

/// Bounding-box centre and half-diagonal of the sites.
FitFrame default_frame(std::span<const Vec3> sites);

struct SplineDerivatives {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

/// A fitted local smoothing spline,
///   F(x) = sum_j lambda_j phi(|x - x_j|) + sum_k a_k p_k((x - c) / s).
///
/// Coefficients live in the frame (c, s): the stored kernel weights are
/// s^(2m-d) lambda_j and the monomials take frame coordinates.
class LocalSpline {
 public:
  LocalSpline() = default;

  double value(const Vec3& x) const;
  SplineDerivatives derivatives(const Vec3& x, bool withHessian) const;

  const PhsKernel& kernel() const { return kernel_; }
  const FitFrame& frame() const { return frame_; }
  double smoothing() const { return rho_; }
  std::size_t size() const { return weights_.size(); }

  /// Centres in world coordinates.
  std::vector<Vec3> centers() const;
  /// Kernel weights lambda_j in world units.
  Eigen::VectorXd lambda() const;
  /// Polynomial coefficients over basis() in frame coordinates.
  const Eigen::VectorXd& polynomial() const { return poly_; }
  const std::vector<Exponent>& basis() const { return basis_; }
  /// True when a rank-deficient polynomial block forced basis truncation.
  bool reduced_basis() const { return reducedBasis_; }

  double max_residual() const { return maxResidual_; }
  double condition_estimate() const { return condition_; }

 private:
  friend class LocalProblem;

  PhsKernel kernel_;
  FitFrame frame_;
  double rho_ = 0.0;
  Eigen::Matrix3Xd xi_;  // centres in frame coordinates
  Eigen::VectorXd weights_;
  Eigen::VectorXd poly_;
  std::vector<Exponent> basis_;
  bool reducedBasis_ = false;
  double maxResidual_ = 0.0;
  double condition_ = 0.0;
};

/// One subdomain's fitting problem, factorised for repeated solves.
///
/// The polynomial block is QR-factorised once; the kernel matrix projected
/// on the orthogonal complement of its columns (Q2^T A Q2) is what both the
/// fixed-rho solve and the GCV score work with.
class LocalProblem {
 public:
  LocalProblem(std::span<const Vec3> sites, std::span<const double> values,
               const PhsKernel& kernel, std::optional<FitFrame> frame = std::nullopt);

  std::size_t size() const { return static_cast<std::size_t>(f_.size()); }
  std::size_t basis_size() const { return basis_.size(); }

  /// Solves the smoothed system with a Cholesky factorisation of the
  /// projected matrix.
  LocalSpline fit(double rho) const;

  /// GCV score V(rho) = N |(I - B) f|^2 / trace(I - B)^2 with
  /// I - B = s Q2 (Q2^T (A + s I) Q2)^-1 Q2^T and s = rho N / theta.
  double gcv(double rho);

  /// Golden-section minimiser of V over [lo, hi] in log10(rho).
  double gcv_minimize(double lo, double hi);

  /// Fit reusing the GCV tridiagonal factorisation (cheap for any rho once
  /// gcv() has been called).
  LocalSpline fit_tridiagonal(double rho);

 private:
  double shift(double rho) const;
  void prepare_tridiagonal();
  LocalSpline finish(double rho, double s, const Eigen::VectorXd& reducedSolution,
                     double condition) const;

  PhsKernel kernel_;
  FitFrame frame_;
  Eigen::Matrix3Xd xi_;
  Eigen::VectorXd f_;
  Eigen::MatrixXd A_;
  Eigen::MatrixXd P_;
  std::vector<Exponent> basis_;
  bool reducedBasis_ = false;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd K_;   // Q2^T A Q2
  Eigen::VectorXd g_;   // Q2^T f

  bool tridiagonalReady_ = false;
  Eigen::MatrixXd tridiagQ_;      // packed reflectors
  Eigen::VectorXd householder_;
  Eigen::VectorXd diag_, subdiag_, eigenvalues_, gT_;
};

/// Fixed-rho fit in the default frame.
LocalSpline fit_local(std::span<const Vec3> sites, std::span<const double> values,
                      const PhsKernel& kernel, double rho,
                      std::optional<FitFrame> frame = std::nullopt);

double gcv_objective(std::span<const Vec3> sites, std::span<const double> values,
                     const PhsKernel& kernel, double rho);

double gcv_minimize(std::span<const Vec3> sites, std::span<const double> values,
                    const PhsKernel& kernel, double lo, double hi);

/// Minimises `score` over [lo, hi] by golden-section search on log10(rho)
/// until the bracket is narrower than `tolerance` decades. A coarse scan
/// seeds the bracket; the best rho evaluated (endpoints included exactly) is
/// returned. Throws NumericalError when a score is not finite.
double minimize_log_bracket(const std::function<double(double)>& score, double lo, double hi,
                            double tolerance = 1e-2);

}  // namespace leafrecon

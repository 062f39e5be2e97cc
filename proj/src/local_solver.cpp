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

#include "leafrecon/local_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

namespace leafrecon {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

double monomial(const Exponent& e, const Vec3& p) {
  return ipow(p.x(), e[0]) * ipow(p.y(), e[1]) * ipow(p.z(), e[2]);
}

/// Product of p_i^(e_i - drop_i) times the falling-factorial coefficient.
double monomial_term(const Exponent& e, const Vec3& p, const std::array<int, 3>& drop) {
  double coeff = 1.0;
  double value = 1.0;
  for (int i = 0; i < 3; ++i) {
    for (int d = 0; d < drop[i]; ++d) coeff *= (e[i] - d);
    if (coeff == 0.0) return 0.0;
    value *= ipow(p[i], e[i] - drop[i]);
  }
  return coeff * value;
}

void add_monomial_derivatives(const Exponent& e, const Vec3& p, double a, bool withHessian,
                              SplineDerivatives& out) {
  out.value += a * monomial(e, p);
  for (int k = 0; k < 3; ++k) {
    std::array<int, 3> drop{0, 0, 0};
    drop[k] = 1;
    out.gradient[k] += a * monomial_term(e, p, drop);
  }
  if (!withHessian) return;
  for (int k = 0; k < 3; ++k) {
    for (int l = k; l < 3; ++l) {
      std::array<int, 3> drop{0, 0, 0};
      ++drop[k];
      ++drop[l];
      const double h = a * monomial_term(e, p, drop);
      out.hessian(k, l) += h;
      if (l != k) out.hessian(l, k) += h;
    }
  }
}

/// Solves (T + s I) y = b for the symmetric tridiagonal T given by its
/// diagonal and subdiagonal. T + s I is definite up to sign, so no pivoting
/// is needed.
Eigen::VectorXd tridiagonal_solve(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                  double s, const Eigen::VectorXd& b) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd c(n), y(n);
  if (n == 0) return y;
  double pivot = diag[0] + s;
  y[0] = b[0] / pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    c[i - 1] = sub[i - 1] / pivot;
    pivot = diag[i] + s - sub[i - 1] * c[i - 1];
    y[i] = (b[i] - sub[i - 1] * y[i - 1]) / pivot;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) y[i] -= c[i] * y[i + 1];
  return y;
}

Eigen::MatrixXd polynomial_matrix(const Eigen::Matrix3Xd& pts, const std::vector<Exponent>& basis) {
  Eigen::MatrixXd P(pts.cols(), static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Vec3 p = pts.col(i);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      P(i, static_cast<Eigen::Index>(k)) = monomial(basis[k], p);
    }
  }
  return P;
}

Eigen::MatrixXd kernel_matrix(const Eigen::Matrix3Xd& pts, const PhsKernel& kernel) {
  const Eigen::Index n = pts.cols();
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    A(j, j) = kernel(0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = kernel((pts.col(i) - pts.col(j)).norm());
      A(i, j) = v;
      A(j, i) = v;
    }
  }
  return A;
}

void require_3d(const PhsKernel& kernel) {
  if (kernel.dimension() != 3) {
    throw UsageError("spline fitting works on 3-D sites; kernel has d=" +
                     std::to_string(kernel.dimension()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PhsKernel

PhsKernel::PhsKernel(int order, int dimension) : order_(order), dimension_(dimension) {
  if (order < 1 || dimension < 1 || 2 * order - dimension <= 0) {
    throw UsageError("polyharmonic kernel needs 2m - d > 0 (m=" + std::to_string(order) +
                     ", d=" + std::to_string(dimension) + ")");
  }
}

double PhsKernel::theta() const {
  const int m = order_;
  const int d = dimension_;
  if (has_log()) {
    const int half = d / 2;
    const double sign = ((half + 1 + m) % 2 == 0) ? 1.0 : -1.0;
    return sign / (std::pow(2.0, 2 * m - 1) * std::pow(kPi, half) * factorial(m - 1) *
                   factorial(m - half));
  }
  return std::tgamma(0.5 * d - m) /
         (std::pow(2.0, 2 * m) * std::pow(kPi, 0.5 * d) * factorial(m - 1));
}

double PhsKernel::operator()(double r) const {
  if (r <= 0.0) return 0.0;
  const double rp = ipow(r, power());
  return has_log() ? rp * std::log(r) : rp;
}

void PhsKernel::radial_derivatives(double r, double& g1, double& g2) const {
  g1 = 0.0;
  g2 = 0.0;
  if (r <= 0.0) return;
  const int p = power();
  const double rp2 = std::pow(r, p - 2);
  const double rp4 = rp2 / (r * r);
  if (has_log()) {
    const double lg = p * std::log(r) + 1.0;
    g1 = rp2 * lg;
    g2 = rp4 * ((p - 2) * lg + p);
  } else {
    g1 = p * rp2;
    g2 = p * (p - 2) * rp4;
  }
}

std::size_t PhsKernel::polynomial_dimension() const {
  // C(d + m - 1, d)
  double c = 1.0;
  for (int i = 1; i <= dimension_; ++i) c = c * (order_ - 1 + i) / i;
  return static_cast<std::size_t>(std::llround(c));
}

double kernel_eval(const PhsKernel& kernel, double r) {
  if (!(r >= 0.0)) throw UsageError("kernel_eval: negative radius");
  return kernel(r);
}

std::vector<Exponent> polynomial_basis(int maxDegree) {
  std::vector<Exponent> out;
  for (int deg = 0; deg <= maxDegree; ++deg) {
    for (int a = deg; a >= 0; --a) {
      for (int b = deg - a; b >= 0; --b) out.push_back({a, b, deg - a - b});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Saddle-point system

Eigen::MatrixXd SaddleSystem::matrix() const {
  const Eigen::Index n = A.rows();
  const Eigen::Index q = P.cols();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + q, n + q);
  M.topLeftCorner(n, n) = A;
  M.topLeftCorner(n, n).diagonal().array() += shift;
  M.topRightCorner(n, q) = P;
  M.bottomLeftCorner(q, n) = P.transpose();
  return M;
}

Eigen::VectorXd SaddleSystem::rhs() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(f.size() + P.cols());
  b.head(f.size()) = f;
  return b;
}

SaddleSystem assemble_system(std::span<const Vec3> sites, std::span<const double> values,
                             const PhsKernel& kernel, double rho) {
  require_3d(kernel);
  if (sites.size() != values.size()) throw UsageError("assemble_system: size mismatch");
  if (!(rho >= 0.0)) throw UsageError("assemble_system: rho must be >= 0");
  const auto basis = polynomial_basis(kernel.order() - 1);
  if (sites.size() < basis.size()) {
    throw DataError("assemble_system: " + std::to_string(sites.size()) +
                    " sites cannot determine " + std::to_string(basis.size()) +
                    " polynomial coefficients");
  }
  Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(sites.size()));
  for (std::size_t i = 0; i < sites.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = sites[i];
  SaddleSystem sys;
  sys.A = kernel_matrix(pts, kernel);
  sys.P = polynomial_matrix(pts, basis);
  sys.shift = rho * static_cast<double>(sites.size()) / kernel.theta();
  sys.f = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return sys;
}

FitFrame default_frame(std::span<const Vec3> sites) {
  const BoundingBox box = bounding_box(sites);
  FitFrame frame;
  frame.center = box.center();
  frame.scale = 0.5 * box.extent().norm();
  if (!(frame.scale > 0.0)) frame.scale = 1.0;
  return frame;
}

// ---------------------------------------------------------------------------
// LocalSpline

double LocalSpline::value(const Vec3& x) const {
  const Vec3 p = (x - frame_.center) / frame_.scale;
  const Eigen::ArrayXd r = (xi_.colwise() - p).colwise().norm().transpose().array();
  double sum = 0.0;
  switch (kernel_.power()) {
    case 1: sum = (r * weights_.array()).sum(); break;
    case 3: sum = (r.cube() * weights_.array()).sum(); break;
    default:
      for (Eigen::Index j = 0; j < r.size(); ++j) sum += weights_[j] * kernel_(r[j]);
  }
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    sum += poly_[static_cast<Eigen::Index>(k)] * monomial(basis_[k], p);
  }
  return sum;
}

SplineDerivatives LocalSpline::derivatives(const Vec3& x, bool withHessian) const {
  const Vec3 p = (x - frame_.center) / frame_.scale;
  SplineDerivatives d;
  for (Eigen::Index j = 0; j < xi_.cols(); ++j) {
    const Vec3 delta = p - xi_.col(j);
    const double r = delta.norm();
    const double w = weights_[j];
    d.value += w * kernel_(r);
    double g1 = 0.0, g2 = 0.0;
    kernel_.radial_derivatives(r, g1, g2);
    d.gradient += (w * g1) * delta;
    if (withHessian) {
      d.hessian.diagonal().array() += w * g1;
      d.hessian.noalias() += (w * g2) * (delta * delta.transpose());
    }
  }
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    add_monomial_derivatives(basis_[k], p, poly_[static_cast<Eigen::Index>(k)], withHessian, d);
  }
  d.gradient /= frame_.scale;
  d.hessian /= frame_.scale * frame_.scale;
  return d;
}

std::vector<Vec3> LocalSpline::centers() const {
  std::vector<Vec3> out(static_cast<std::size_t>(xi_.cols()));
  for (Eigen::Index j = 0; j < xi_.cols(); ++j) {
    out[static_cast<std::size_t>(j)] = frame_.center + frame_.scale * xi_.col(j);
  }
  return out;
}

Eigen::VectorXd LocalSpline::lambda() const {
  return weights_ / std::pow(frame_.scale, kernel_.power());
}

// ---------------------------------------------------------------------------
// LocalProblem

LocalProblem::LocalProblem(std::span<const Vec3> sites, std::span<const double> values,
                           const PhsKernel& kernel, std::optional<FitFrame> frame)
    : kernel_(kernel), frame_(frame.value_or(default_frame(sites))) {
  require_3d(kernel);
  if (sites.size() != values.size()) throw UsageError("local fit: size mismatch");
  const auto fullBasis = polynomial_basis(kernel.order() - 1);
  const auto n = static_cast<Eigen::Index>(sites.size());
  if (sites.size() < fullBasis.size()) {
    throw DataError("local fit: " + std::to_string(sites.size()) + " sites cannot determine " +
                    std::to_string(fullBasis.size()) + " polynomial coefficients");
  }
  if (!(frame_.scale > 0.0)) throw UsageError("local fit: frame scale must be > 0");

  xi_.resize(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xi_.col(i) = (sites[static_cast<std::size_t>(i)] - frame_.center) / frame_.scale;
  }
  f_ = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
  A_ = kernel_matrix(xi_, kernel_);

  // Rank check of the polynomial block; keep the independent pivot columns
  // when nearly planar sites make some monomials dependent.
  const Eigen::MatrixXd fullP = polynomial_matrix(xi_, fullBasis);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(fullP);
  pivoted.setThreshold(1e-10);
  const auto rank = static_cast<std::size_t>(pivoted.rank());
  if (rank < fullBasis.size()) {
    std::vector<int> keep(pivoted.colsPermutation().indices().data(),
                          pivoted.colsPermutation().indices().data() + rank);
    std::sort(keep.begin(), keep.end());
    for (int k : keep) basis_.push_back(fullBasis[static_cast<std::size_t>(k)]);
    reducedBasis_ = true;
    spdlog::debug("local fit: polynomial block has rank {} of {}", rank, fullBasis.size());
  } else {
    basis_ = fullBasis;
  }
  P_ = polynomial_matrix(xi_, basis_);
  qr_.compute(P_);

  const Eigen::Index q = P_.cols();
  const Eigen::Index free = n - q;
  Eigen::MatrixXd M = A_;
  M.applyOnTheLeft(qr_.householderQ().adjoint());
  M.applyOnTheRight(qr_.householderQ());
  K_ = M.bottomRightCorner(free, free);
  K_ = 0.5 * (K_ + K_.transpose()).eval();
  Eigen::VectorXd qtf = f_;
  qtf.applyOnTheLeft(qr_.householderQ().adjoint());
  g_ = qtf.tail(free);
}

double LocalProblem::shift(double rho) const {
  return rho * static_cast<double>(f_.size()) / kernel_.theta() /
         std::pow(frame_.scale, kernel_.power());
}

LocalSpline LocalProblem::fit(double rho) const {
  if (!(rho >= 0.0)) throw UsageError("local fit: rho must be >= 0");
  const double s = shift(rho);
  const double sign = kernel_.theta() > 0.0 ? 1.0 : -1.0;
  const Eigen::Index free = K_.rows();
  Eigen::VectorXd c(free);
  double condition = 1.0;
  if (free > 0) {
    Eigen::MatrixXd M = sign * K_;
    M.diagonal().array() += sign * s;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) {
      c = llt.solve(sign * g_);
      condition = 1.0 / llt.rcond();
    } else {
      // The projected matrix lost definiteness (coincident sites, or a
      // negative smoothing shift crossing an eigenvalue).
      if (sign < 0.0 && s > 0.0) {
        spdlog::warn("local fit: smoothing shift {:.3g} changed the inertia of the "
                     "projected system; falling back to LU", -s);
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
      c = lu.solve(sign * g_);
      condition = 1.0 / lu.rcond();
    }
    if (!c.allFinite()) throw NumericalError("local fit: singular system");
  }
  return finish(rho, s, c, condition);
}

LocalSpline LocalProblem::finish(double rho, double s, const Eigen::VectorXd& c,
                                 double condition) const {
  const Eigen::Index n = f_.size();
  const Eigen::Index q = P_.cols();
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(n);
  lam.tail(n - q) = c;
  lam.applyOnTheLeft(qr_.householderQ());

  const Eigen::VectorXd kernelPart = A_ * lam;
  const Eigen::VectorXd remainder = f_ - kernelPart - s * lam;
  const Eigen::VectorXd a = qr_.solve(remainder);

  LocalSpline spline;
  spline.kernel_ = kernel_;
  spline.frame_ = frame_;
  spline.rho_ = rho;
  spline.xi_ = xi_;
  spline.weights_ = std::move(lam);
  spline.poly_ = a;
  spline.basis_ = basis_;
  spline.reducedBasis_ = reducedBasis_;
  spline.maxResidual_ = (kernelPart + P_ * a - f_).cwiseAbs().maxCoeff();
  spline.condition_ = condition;
  if (!spline.weights_.allFinite() || !spline.poly_.allFinite()) {
    throw NumericalError("local fit: non-finite coefficients");
  }
  return spline;
}

void LocalProblem::prepare_tridiagonal() {
  if (tridiagonalReady_) return;
  const Eigen::Index free = K_.rows();
  if (free > 0) {
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(K_);
    diag_ = tri.diagonal();
    subdiag_ = tri.subDiagonal();
    gT_ = g_;
    gT_.applyOnTheLeft(tri.matrixQ().adjoint());
    // Keep the reflectors so solutions can be mapped back.
    tridiagQ_ = tri.packedMatrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag_, subdiag_, Eigen::EigenvaluesOnly);
    eigenvalues_ = eig.eigenvalues();
    householder_ = tri.householderCoefficients();
  }
  tridiagonalReady_ = true;
}

double LocalProblem::gcv(double rho) {
  if (!(rho > 0.0)) throw UsageError("gcv: rho must be > 0");
  prepare_tridiagonal();
  if (K_.rows() == 0) return 0.0;  // polynomial interpolation: I - B = 0
  const double s = shift(rho);
  const Eigen::VectorXd y = tridiagonal_solve(diag_, subdiag_, s, gT_);
  const double trace = (eigenvalues_.array() + s).inverse().sum();
  return static_cast<double>(f_.size()) * y.squaredNorm() / (trace * trace);
}

double LocalProblem::gcv_minimize(double lo, double hi) {
  return minimize_log_bracket([this](double rho) { return gcv(rho); }, lo, hi);
}

LocalSpline LocalProblem::fit_tridiagonal(double rho) {
  prepare_tridiagonal();
  const double s = shift(rho);
  const Eigen::Index free = K_.rows();
  Eigen::VectorXd c(free);
  double condition = 1.0;
  if (free > 0) {
    c = tridiagonal_solve(diag_, subdiag_, s, gT_);
    const Eigen::ArrayXd shifted = (eigenvalues_.array() + s).abs();
    condition = shifted.maxCoeff() / shifted.minCoeff();
    Eigen::HouseholderSequence<Eigen::MatrixXd, Eigen::VectorXd> Q(tridiagQ_, householder_);
    Q.setLength(free - 1).setShift(1);
    c.applyOnTheLeft(Q);
    if (!c.allFinite()) throw NumericalError("local fit: singular system");
  }
  return finish(rho, s, c, condition);
}

// ---------------------------------------------------------------------------
// Free functions

LocalSpline fit_local(std::span<const Vec3> sites, std::span<const double> values,
                      const PhsKernel& kernel, double rho, std::optional<FitFrame> frame) {
  return LocalProblem(sites, values, kernel, frame).fit(rho);
}

double gcv_objective(std::span<const Vec3> sites, std::span<const double> values,
                     const PhsKernel& kernel, double rho) {
  LocalProblem problem(sites, values, kernel);
  return problem.gcv(rho);
}

double gcv_minimize(std::span<const Vec3> sites, std::span<const double> values,
                    const PhsKernel& kernel, double lo, double hi) {
  LocalProblem problem(sites, values, kernel);
  return problem.gcv_minimize(lo, hi);
}

double minimize_log_bracket(const std::function<double(double)>& score, double lo, double hi,
                            double tolerance) {
  if (!(lo > 0.0 && lo < hi)) throw UsageError("GCV bracket needs 0 < lo < hi");
  const double a = std::log10(lo);
  const double b = std::log10(hi);

  double bestRho = lo;
  double bestScore = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double x) {
    const double rho = x <= a ? lo : (x >= b ? hi : std::pow(10.0, x));
    const double v = score(rho);
    if (!std::isfinite(v)) {
      throw NumericalError("GCV score is not finite at rho=" + std::to_string(rho));
    }
    if (v < bestScore) {
      bestScore = v;
      bestRho = rho;
    }
    return v;
  };

  // Coarse scan, two points per decade, to pick the basin.
  const int intervals = std::max(2, static_cast<int>(std::ceil((b - a) * 2.0)));
  std::vector<double> xs(static_cast<std::size_t>(intervals) + 1);
  std::vector<double> vs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = i + 1 == xs.size() ? b : a + (b - a) * static_cast<double>(i) / intervals;
    vs[i] = evaluate(xs[i]);
  }
  const auto j = static_cast<std::size_t>(std::min_element(vs.begin(), vs.end()) - vs.begin());
  double left = xs[j == 0 ? 0 : j - 1];
  double right = xs[std::min(j + 1, xs.size() - 1)];

  const double invPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = right - invPhi * (right - left);
  double x2 = left + invPhi * (right - left);
  double f1 = evaluate(x1);
  double f2 = evaluate(x2);
  while (right - left > tolerance) {
    if (f1 <= f2) {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - invPhi * (right - left);
      f1 = evaluate(x1);
    } else {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + invPhi * (right - left);
      f2 = evaluate(x2);
    }
  }
  return bestRho;
}

}  // namespace leafrecon

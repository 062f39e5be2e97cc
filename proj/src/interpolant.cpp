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

#include "leafrecon/interpolant.hpp"

#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace leafrecon {

DomainMask::DomainMask(std::span<const Vec3> sites, double alpha) : index_(sites), alpha_(alpha) {
  if (!(alpha > 0.0)) throw UsageError("domain mask: alpha must be > 0");
}

DomainMask build_domain_mask(const AugmentedDataset& data, double alpha) {
  const double L = data.offset;
  const double slack = 1e-12 * alpha;
  if (L > 0.0 && (alpha < 3.0 * L - slack || alpha > 10.0 * L + slack)) {
    spdlog::warn("alpha={} is outside the recommended range [3L, 10L] = [{}, {}]", alpha, 3.0 * L,
                 10.0 * L);
  }
  return DomainMask(data.sites, alpha);
}

ImplicitField::ImplicitField(Partition partition, std::vector<LocalSpline> splines,
                             DomainMask mask)
    : partition_(std::move(partition)), splines_(std::move(splines)), mask_(std::move(mask)) {
  if (splines_.size() != partition_.size()) {
    throw UsageError("implicit field: one spline per subdomain required");
  }
}

std::optional<double> ImplicitField::value_unmasked(const Vec3& x) const {
  const auto weights = partition_.shepard_weights(x);
  if (weights.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [i, w] : weights) sum += w * splines_[i].value(x);
  return sum;
}

std::optional<FieldDerivatives> ImplicitField::derivatives(const Vec3& x, bool withHessian) const {
  double S = 0.0, N = 0.0;
  Vec3 gS = Vec3::Zero(), gN = Vec3::Zero();
  Mat3 hS = Mat3::Zero(), hN = Mat3::Zero();
  bool any = false;
  for (const auto i : partition_.containing(x)) {
    const auto& sub = partition_.subdomain(i);
    const auto w = wendland_derivatives(x, sub.center, sub.radius, partition_.kernel());
    if (!(w.value > 0.0)) continue;
    any = true;
    const auto f = splines_[i].derivatives(x, withHessian);
    S += w.value;
    N += w.value * f.value;
    gS += w.gradient;
    gN += w.gradient * f.value + w.value * f.gradient;
    if (withHessian) {
      hS += w.hessian;
      hN += w.hessian * f.value + w.gradient * f.gradient.transpose() +
            f.gradient * w.gradient.transpose() + w.value * f.hessian;
    }
  }
  if (!any) return std::nullopt;
  // Quotient rule for N / S.
  FieldDerivatives d;
  d.value = N / S;
  d.gradient = (gN - d.value * gS) / S;
  if (withHessian) {
    d.hessian = (hN - d.gradient * gS.transpose() - gS * d.gradient.transpose() -
                 d.value * hS) /
                S;
  }
  return d;
}

bool ImplicitField::in_domain(const Vec3& x) const {
  return mask_.contains(x) && !partition_.containing(x).empty();
}

FieldSample ImplicitField::eval(const Vec3& x, bool withGradient) const {
  FieldSample s;
  if (!mask_.contains(x)) return s;
  if (withGradient) {
    const auto d = derivatives(x, false);
    if (!d) return s;
    s.inDomain = true;
    s.value = d->value;
    s.gradient = d->gradient;
    return s;
  }
  const auto v = value_unmasked(x);
  if (!v) return s;
  s.inDomain = true;
  s.value = *v;
  return s;
}

Vec3 ImplicitField::gradient(const Vec3& x) const {
  const auto d = mask_.contains(x) ? derivatives(x, false) : std::nullopt;
  if (!d) {
    throw DataError(fmt::format("gradient: ({}, {}, {}) is out of domain", x.x(), x.y(), x.z()));
  }
  return d->gradient;
}

double ImplicitField::mean_curvature(const Vec3& x) const {
  const auto d = mask_.contains(x) ? derivatives(x, true) : std::nullopt;
  if (!d) {
    throw DataError(
        fmt::format("mean_curvature: ({}, {}, {}) is out of domain", x.x(), x.y(), x.z()));
  }
  const Vec3& g = d->gradient;
  const double norm = g.norm();
  if (!(norm > 1e-12)) {
    throw NumericalError(
        fmt::format("mean_curvature: vanishing gradient at ({}, {}, {})", x.x(), x.y(), x.z()));
  }
  return -(norm * norm * d->hessian.trace() - g.dot(d->hessian * g)) / (norm * norm * norm);
}

ImplicitField fit_field(const AugmentedDataset& data, Partition partition,
                        const FitOptions& options, double alpha) {
  if (!options.gcv && !(options.smoothing >= 0.0)) {
    throw UsageError("fit_field: smoothing must be >= 0");
  }
  const std::size_t m = partition.size();
  std::vector<LocalSpline> splines(m);
  std::vector<double> rho(m, options.smoothing);

  parallel_for(m, options.workers, [&](std::size_t i) {
    const auto& sub = partition.subdomain(i);
    std::vector<Vec3> sites;
    std::vector<double> values;
    sites.reserve(sub.memberIds.size());
    values.reserve(sub.memberIds.size());
    for (const auto id : sub.memberIds) {
      sites.push_back(data.sites[id]);
      values.push_back(data.values[id]);
    }
    try {
      LocalProblem problem(sites, values, options.kernel, FitFrame{sub.center, sub.radius});
      if (options.gcv) {
        rho[i] = problem.gcv_minimize(options.gcvLow, options.gcvHigh);
        splines[i] = problem.fit_tridiagonal(rho[i]);
      } else {
        splines[i] = problem.fit(rho[i]);
      }
      spdlog::debug("subdomain {}: N={} rho={:.4g} residual={:.3g} cond={:.3g}", i, sites.size(),
                    rho[i], splines[i].max_residual(), splines[i].condition_estimate());
    } catch (const Error& e) {
      const std::string what = fmt::format("subdomain {}: {}", i, e.what());
      if (e.kind() == ErrorKind::numerical) throw NumericalError(what);
      if (e.kind() == ErrorKind::usage) throw UsageError(what);
      throw DataError(what);
    }
  });

  for (std::size_t i = 0; i < m; ++i) partition.set_smoothing(i, rho[i]);
  DomainMask mask = build_domain_mask(data, alpha);
  return ImplicitField(std::move(partition), std::move(splines), std::move(mask));
}

}  // namespace leafrecon

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

#include <optional>
#include <span>
#include <vector>

#include "leafrecon/core.hpp"
#include "leafrecon/local_solver.hpp"
#include "leafrecon/partition.hpp"
#include "leafrecon/spatial_index.hpp"

namespace leafrecon {

/// Union of closed balls of radius alpha around the augmented sites. Stands
/// in for an alpha-shape as the inside test that keeps evaluation near the
/// data.
class DomainMask {
 public:
  DomainMask() = default;
  DomainMask(std::span<const Vec3> sites, double alpha);

  bool contains(const Vec3& x) const { return index_.any_within(x, alpha_); }
  double alpha() const { return alpha_; }
  const SpatialIndex& index() const { return index_; }

 private:
  SpatialIndex index_;
  double alpha_ = 0.0;
};

/// Logs an advisory when alpha falls outside [3L, 10L] for L = data.offset.
DomainMask build_domain_mask(const AugmentedDataset& data, double alpha);

struct FieldSample {
  bool inDomain = false;
  std::optional<double> value;
  std::optional<Vec3> gradient;
};

/// Value, gradient and Hessian of the blended field.
struct FieldDerivatives {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

/// F(x) = sum_i w_i(x) F_i(x) with Shepard-normalised Wendland weights.
class ImplicitField {
 public:
  ImplicitField() = default;
  ImplicitField(Partition partition, std::vector<LocalSpline> splines, DomainMask mask);

  /// Out-of-domain (outside the mask or every subdomain) is a valid result.
  FieldSample eval(const Vec3& x, bool withGradient = false) const;

  bool in_domain(const Vec3& x) const;

  /// Throws DataError when x is out of domain.
  Vec3 gradient(const Vec3& x) const;

  /// -div(grad F / |grad F|) from the analytic Hessian. Throws DataError out
  /// of domain and NumericalError where |grad F| <= 1e-12.
  double mean_curvature(const Vec3& x) const;

  /// Blend without the mask test; empty outside every subdomain.
  std::optional<FieldDerivatives> derivatives(const Vec3& x, bool withHessian) const;
  std::optional<double> value_unmasked(const Vec3& x) const;

  const Partition& partition() const { return partition_; }
  std::span<const LocalSpline> splines() const { return splines_; }
  const DomainMask& mask() const { return mask_; }

 private:
  Partition partition_;
  std::vector<LocalSpline> splines_;
  DomainMask mask_;
};

struct FitOptions {
  PhsKernel kernel{3, 3};
  bool gcv = false;
  double smoothing = 0.0;  // used when gcv is false
  double gcvLow = 1e-6;
  double gcvHigh = 1e-1;
  unsigned workers = 0;
};

/// Fits one spline per subdomain, in the frame (centre, radius) of the
/// subdomain, and records the smoothing used in the partition. Errors name
/// the failing subdomain.
ImplicitField fit_field(const AugmentedDataset& data, Partition partition,
                        const FitOptions& options, double alpha);

}  // namespace leafrecon

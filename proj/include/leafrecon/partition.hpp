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

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "leafrecon/config.hpp"
#include "leafrecon/core.hpp"
#include "leafrecon/spatial_index.hpp"

namespace leafrecon {

/// Closed ball {x : |x - center| <= radius} and the constraint sites in it.
struct Subdomain {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  std::vector<std::uint32_t> memberIds;  // ascending
  double smoothing = 0.0;                // filled in by the local fit
};

/// What the split loop and the growth pass did.
struct PartitionStats {
  std::size_t splits = 0;
  std::size_t cubesAtExit = 0;
  std::size_t maxCountAtExit = 0;  // largest covering-sphere count when splitting stopped
  std::size_t unsplittable = 0;    // cubes that hit the minimum side length
  std::size_t deletedEmpty = 0;
  std::size_t grown = 0;
};

/// Compactly supported weight: C2 is (1-r)^4 (4r+1), C4 is
/// (1-r)^6 (35r^2+18r+3), both zero for r > 1. Throws on r < 0.
double wendland(double r, WeightKernel kind);

/// Value, gradient and Hessian of x -> wendland(|x - c| / radius).
struct WeightDerivatives {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};
WeightDerivatives wendland_derivatives(const Vec3& x, const Vec3& center, double radius,
                                       WeightKernel kind);

class Partition {
 public:
  Partition() = default;
  Partition(std::vector<Subdomain> subdomains, WeightKernel kernel, double expand);

  std::span<const Subdomain> subdomains() const { return subdomains_; }
  const Subdomain& subdomain(std::size_t i) const { return subdomains_[i]; }
  std::size_t size() const { return subdomains_.size(); }
  WeightKernel kernel() const { return kernel_; }
  double expand() const { return expand_; }

  void set_smoothing(std::size_t i, double rho) { subdomains_[i].smoothing = rho; }

  /// Subdomains whose closed ball contains x, ascending.
  std::vector<std::size_t> containing(const Vec3& x) const;

  /// Shepard-normalised weights; only non-zero entries, ascending by id. An
  /// empty result means x lies outside every subdomain.
  std::vector<std::pair<std::size_t, double>> shepard_weights(const Vec3& x) const;

  PartitionStats stats;

 private:
  std::vector<Subdomain> subdomains_;
  WeightKernel kernel_ = WeightKernel::wendland_c2;
  double expand_ = 1.0;
  SpatialIndex centers_;
  double maxRadius_ = 0.0;
};

/// Octree-like cover of `sites` by spheres.
///
/// Starting from the bounding cube, the cube whose covering sphere (radius
/// sqrt(3)/2 * side) holds the most sites is split into eight until none
/// holds more than nMax; ties go to the older cube. Empty spheres are dropped,
/// spheres holding fewer than nMin sites grow to the distance of their
/// nMin-th nearest site (all sites when fewer exist), and every radius is
/// finally multiplied by `expand`.
Partition build_partition(std::span<const Vec3> sites, int nMin, int nMax, double expand,
                          WeightKernel kernel = WeightKernel::wendland_c2,
                          const SpatialIndex* siteIndex = nullptr);

/// One "cx cy cz r count" line per subdomain.
void save_partition(const Partition& partition, const std::filesystem::path& path);

}  // namespace leafrecon

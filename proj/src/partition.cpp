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

#include "leafrecon/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <queue>
#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace leafrecon {

double wendland(double r, WeightKernel kind) {
  if (!(r >= 0.0)) throw UsageError("wendland: negative argument");
  if (r >= 1.0) return 0.0;
  const double s = 1.0 - r;
  if (kind == WeightKernel::wendland_c2) {
    const double s2 = s * s;
    return s2 * s2 * (4.0 * r + 1.0);
  }
  const double s3 = s * s * s;
  return s3 * s3 * (35.0 * r * r + 18.0 * r + 3.0);
}

WeightDerivatives wendland_derivatives(const Vec3& x, const Vec3& center, double radius,
                                       WeightKernel kind) {
  WeightDerivatives out;
  const Vec3 u = x - center;
  const double inv2 = 1.0 / (radius * radius);
  const double t = u.norm() / radius;
  if (t >= 1.0) return out;
  const double s = 1.0 - t;
  // psi(t) with psi'(t) = t * g(t); the gradient is g(t) u / radius^2 and
  // the Hessian g(t)/radius^2 I + g'(t)/t u u^T / radius^4.
  double g = 0.0, gpOverT = 0.0;
  if (kind == WeightKernel::wendland_c2) {
    const double s2 = s * s;
    out.value = s2 * s2 * (4.0 * t + 1.0);
    g = -20.0 * s2 * s;
    // g'(t) = 60 (1-t)^2; the u u^T factor vanishes like t^2 at the centre.
    gpOverT = t > 0.0 ? 60.0 * s2 / t : 0.0;
  } else {
    const double s2 = s * s, s4 = s2 * s2;
    out.value = s4 * s2 * (35.0 * t * t + 18.0 * t + 3.0);
    g = -56.0 * s4 * s * (5.0 * t + 1.0);
    gpOverT = 1680.0 * s4;  // g'(t) = 1680 t (1-t)^4
  }
  out.gradient = g * inv2 * u;
  out.hessian = g * inv2 * Mat3::Identity();
  out.hessian.noalias() += (gpOverT * inv2 * inv2) * (u * u.transpose());
  return out;
}

Partition::Partition(std::vector<Subdomain> subdomains, WeightKernel kernel, double expand)
    : subdomains_(std::move(subdomains)), kernel_(kernel), expand_(expand) {
  if (subdomains_.empty()) return;
  std::vector<Vec3> centers;
  centers.reserve(subdomains_.size());
  for (const auto& s : subdomains_) {
    if (!(s.radius > 0.0)) throw DataError("subdomain radius must be positive");
    centers.push_back(s.center);
    maxRadius_ = std::max(maxRadius_, s.radius);
  }
  centers_ = SpatialIndex(centers);
}

std::vector<std::size_t> Partition::containing(const Vec3& x) const {
  std::vector<std::size_t> out;
  if (subdomains_.empty()) return out;
  for (const auto i : centers_.radius_search(x, maxRadius_)) {
    const auto& s = subdomains_[i];
    if ((x - s.center).norm() <= s.radius) out.push_back(i);
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> Partition::shepard_weights(const Vec3& x) const {
  std::vector<std::pair<std::size_t, double>> out;
  double total = 0.0;
  for (const auto i : containing(x)) {
    const auto& s = subdomains_[i];
    const double phi = wendland((x - s.center).norm() / s.radius, kernel_);
    if (phi > 0.0) {
      out.emplace_back(i, phi);
      total += phi;
    }
  }
  for (auto& [i, w] : out) w /= total;
  return out;
}

Partition build_partition(std::span<const Vec3> sites, int nMin, int nMax, double expand,
                          WeightKernel kernel, const SpatialIndex* siteIndex) {
  if (sites.empty()) throw DataError("build_partition: no sites");
  if (nMin < 1 || nMax < 1 || nMin > nMax) {
    throw UsageError("build_partition: need 1 <= nMin <= nMax");
  }
  if (!(expand >= 1.0)) throw UsageError("build_partition: expand must be >= 1");

  std::optional<SpatialIndex> ownIndex;
  if (siteIndex == nullptr) {
    ownIndex.emplace(sites);
    siteIndex = &*ownIndex;
  }
  const SpatialIndex& index = *siteIndex;
  // Circumscribed radius of a cube, padded so that a site sitting exactly on
  // a corner is not lost to rounding.
  const double sphereFactor = std::sqrt(3.0) / 2.0 * (1.0 + 1e-9);

  struct Cube {
    Vec3 center;
    double side;
    std::size_t created;
    std::size_t count;
  };
  auto busier = [](const Cube& a, const Cube& b) {
    // priority_queue keeps the "largest" on top: most sites, then oldest.
    if (a.count != b.count) return a.count < b.count;
    return a.created > b.created;
  };
  std::priority_queue<Cube, std::vector<Cube>, decltype(busier)> queue(busier);

  const BoundingBox box = bounding_box(sites);
  const double side0 = std::max(box.extent().maxCoeff(), 1e-12);
  std::size_t created = 0;
  auto make_cube = [&](const Vec3& c, double side) {
    return Cube{c, side, created++, index.count_within(c, sphereFactor * side)};
  };
  queue.push(make_cube(box.center(), side0));

  PartitionStats stats;
  std::vector<Cube> finished;
  const double minSide = side0 * 1e-9;
  while (!queue.empty() && queue.top().count > static_cast<std::size_t>(nMax)) {
    const Cube cube = queue.top();
    queue.pop();
    if (cube.side < minSide) {
      // Coincident sites; splitting further cannot reduce the count.
      ++stats.unsplittable;
      finished.push_back(cube);
      continue;
    }
    ++stats.splits;
    const double q = cube.side / 4.0;
    for (int octant = 0; octant < 8; ++octant) {
      const Vec3 offset((octant & 1) ? q : -q, (octant & 2) ? q : -q, (octant & 4) ? q : -q);
      queue.push(make_cube(cube.center + offset, cube.side / 2.0));
    }
  }
  while (!queue.empty()) {
    finished.push_back(queue.top());
    queue.pop();
  }
  std::sort(finished.begin(), finished.end(),
            [](const Cube& a, const Cube& b) { return a.created < b.created; });
  if (stats.unsplittable > 0) {
    spdlog::warn("build_partition: {} cubes of coincident sites exceed nMax", stats.unsplittable);
  }

  stats.cubesAtExit = finished.size();
  const std::size_t need = std::min<std::size_t>(static_cast<std::size_t>(nMin), sites.size());
  std::vector<Subdomain> subdomains;
  for (const auto& cube : finished) {
    stats.maxCountAtExit = std::max(stats.maxCountAtExit, cube.count);
    if (cube.count == 0) {
      ++stats.deletedEmpty;
      continue;
    }
    Subdomain s;
    s.center = cube.center;
    s.radius = sphereFactor * cube.side;
    if (cube.count < need) {
      s.radius = index.knn(cube.center, need).back().distance;
      ++stats.grown;
    }
    s.radius *= expand;
    if (!(s.radius > 0.0)) s.radius = std::max(sphereFactor * cube.side, 1e-12);
    const auto ids = index.radius_search(s.center, s.radius);
    s.memberIds.assign(ids.begin(), ids.end());
    subdomains.push_back(std::move(s));
  }

  Partition partition(std::move(subdomains), kernel, expand);
  partition.stats = stats;
  return partition;
}

void save_partition(const Partition& partition, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : partition.subdomains()) {
    out << fmt::format("{:.12g} {:.12g} {:.12g} {:.12g} {}\n", s.center.x(), s.center.y(),
                       s.center.z(), s.radius, s.memberIds.size());
  }
}

}  // namespace leafrecon

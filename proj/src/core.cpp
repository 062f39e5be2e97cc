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

#include "leafrecon/core.hpp"

#include <cmath>
#include <string>
#include <thread>

namespace leafrecon {

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw DataError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  if (normals.empty()) return;
  if (normals.size() != points.size()) {
    throw DataError("normal count " + std::to_string(normals.size()) +
                    " does not match point count " + std::to_string(points.size()));
  }
  if (!normalMissing.empty() && normalMissing.size() != points.size()) {
    throw DataError("missing-normal flags do not match point count");
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normal_valid(i)) continue;
    if (std::abs(normals[i].norm() - 1.0) > 1e-9) {
      throw DataError("normal " + std::to_string(i) + " is not unit length");
    }
  }
}

void TriangleMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (auto v : tri) {
      if (v >= n) {
        throw DataError("triangle " + std::to_string(t) + " references vertex " +
                        std::to_string(v) + " of " + std::to_string(n));
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw DataError("triangle " + std::to_string(t) + " is degenerate");
    }
  }
  for (const auto& [name, values] : vertexScalars) {
    if (values.size() != n) {
      throw DataError("vertex scalar '" + name + "' has the wrong length");
    }
  }
}

BoundingBox bounding_box(std::span<const Vec3> points) {
  BoundingBox box;
  for (const auto& p : points) box.extend(p);
  return box;
}

Vec3 Rng::unit_vector() {
  for (;;) {
    Vec3 v(normal(), normal(), normal());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Vec3 Rng::uniform_in_box(const Vec3& lo, const Vec3& hi) {
  Vec3 v;
  for (int k = 0; k < 3; ++k) v[k] = uniform(lo[k], hi[k]);
  return v;
}

unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace leafrecon

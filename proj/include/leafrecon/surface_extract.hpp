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
#include <cmath>
#include <filesystem>
#include <vector>

#include "leafrecon/core.hpp"
#include "leafrecon/interpolant.hpp"

namespace leafrecon {

/// Regular grid of field values; NaN marks an out-of-domain node.
struct SampleGrid {
  Vec3 origin = Vec3::Zero();
  double step = 1.0;
  std::array<std::size_t, 3> dims{0, 0, 0};
  std::vector<double> values;  // x fastest, then y, then z

  std::size_t node_count() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims[0] * (j + dims[1] * k);
  }
  Vec3 node(std::size_t i, std::size_t j, std::size_t k) const {
    return origin + step * Vec3(static_cast<double>(i), static_cast<double>(j),
                                static_cast<double>(k));
  }
  static bool masked(double v) { return std::isnan(v); }
};

/// Grid over the bounding box of the field's augmented sites padded by 2h.
/// Throws UsageError when the node count exceeds nodeBudget.
SampleGrid sample_grid(const ImplicitField& field, double h, double nodeBudget = 2e8,
                       unsigned workers = 0);

/// Empty grid with the same geometry rules, for callers that fill values
/// themselves.
SampleGrid make_grid(const BoundingBox& box, double h, double nodeBudget = 2e8);

/// Text dump: origin, step, dims, then one value per line ("nan" if masked).
void save_grid(const SampleGrid& grid, const std::filesystem::path& path);

/// Zero level set of one tetrahedron: 0, 1 or 2 triangles, each oriented so
/// that its normal points towards positive values.
std::vector<std::array<Vec3, 3>> tetrahedron_triangles(const std::array<Vec3, 4>& corners,
                                                       const std::array<double, 4>& values);

/// Marching tetrahedra with six tetrahedra per cell around the
/// (0,0,0)-(1,1,1) diagonal. Cells touching a masked node are skipped;
/// vertices on shared edges are merged.
TriangleMesh marching_tetrahedra(const SampleGrid& grid);

/// Adds the "mean_curvature" vertex scalar. Vertices where the curvature is
/// undefined get NaN; their number is returned.
std::size_t attach_curvature(TriangleMesh& mesh, const ImplicitField& field, unsigned workers = 0);

}  // namespace leafrecon

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
#include <utility>
#include <vector>

#include "leafrecon/core.hpp"

namespace leafrecon {

struct OutlierReport {
  std::vector<std::size_t> keptIds;
  std::vector<std::size_t> removedIds;
  std::vector<double> meanNeighborDistance;  // per input point
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

/// Drops points whose mean distance to their k nearest neighbours (self
/// excluded) exceeds mean + threshold * stddev of that statistic.
std::pair<PointCloud, OutlierReport> remove_outliers(const PointCloud& cloud, int k,
                                                     double threshold,
                                                     unsigned workers = 0);

/// Replaces the points of each occupied cubic cell by their centroid.
///
/// Cells are anchored at `origin`, or at the bounding-box minimum when no
/// origin is given. Output is ordered by cell (z, then y, then x). With
/// normals, each cell gets the renormalised mean normal; a mean that cancels
/// to zero leaves the cell flagged in `normalMissing`.
PointCloud grid_downsample(const PointCloud& cloud, double step,
                           std::optional<Vec3> origin = std::nullopt);

}  // namespace leafrecon

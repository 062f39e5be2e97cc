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

#include "leafrecon/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "leafrecon/spatial_index.hpp"

namespace leafrecon {

std::pair<PointCloud, OutlierReport> remove_outliers(const PointCloud& cloud, int k,
                                                     double threshold, unsigned workers) {
  const std::size_t n = cloud.size();
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    throw UsageError("remove_outliers: need 1 <= k < N (k=" + std::to_string(k) +
                     ", N=" + std::to_string(n) + ")");
  }
  if (!std::isfinite(threshold) && !(threshold > 0)) {
    throw UsageError("remove_outliers: threshold must not be -inf or NaN");
  }

  const SpatialIndex index(cloud.points);
  OutlierReport report;
  report.meanNeighborDistance.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    // k+1 neighbours so that the query point itself can be skipped by id.
    const auto nbrs = index.knn(cloud.points[i], static_cast<std::size_t>(k) + 1);
    double sum = 0.0;
    int used = 0;
    for (const auto& nb : nbrs) {
      if (nb.id == i || used == k) continue;
      sum += nb.distance;
      ++used;
    }
    report.meanNeighborDistance[i] = sum / used;
  });

  double mean = 0.0;
  for (double d : report.meanNeighborDistance) mean += d;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double d : report.meanNeighborDistance) var += (d - mean) * (d - mean);
  report.mean = mean;
  report.stddev = std::sqrt(var / static_cast<double>(n));

  const double cutoff = mean + threshold * report.stddev;
  PointCloud kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (report.meanNeighborDistance[i] > cutoff) {
      report.removedIds.push_back(i);
      continue;
    }
    report.keptIds.push_back(i);
    kept.points.push_back(cloud.points[i]);
    if (cloud.has_normals()) {
      kept.normals.push_back(cloud.normals[i]);
      if (!cloud.normalMissing.empty()) kept.normalMissing.push_back(cloud.normalMissing[i]);
    }
  }
  return {std::move(kept), std::move(report)};
}

PointCloud grid_downsample(const PointCloud& cloud, double step, std::optional<Vec3> origin) {
  if (!(step > 0.0)) throw UsageError("grid_downsample: step must be > 0");
  if (cloud.size() == 0) return {};
  const Vec3 anchor = origin.value_or(bounding_box(cloud.points).min);

  struct Entry {
    std::array<std::int64_t, 3> cell;
    std::size_t id;
  };
  std::vector<Entry> entries(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 rel = (cloud.points[i] - anchor) / step;
    entries[i] = {{static_cast<std::int64_t>(std::floor(rel.x())),
                   static_cast<std::int64_t>(std::floor(rel.y())),
                   static_cast<std::int64_t>(std::floor(rel.z()))},
                  i};
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.cell[2] != b.cell[2]) return a.cell[2] < b.cell[2];
    if (a.cell[1] != b.cell[1]) return a.cell[1] < b.cell[1];
    if (a.cell[0] != b.cell[0]) return a.cell[0] < b.cell[0];
    return a.id < b.id;
  });

  const bool withNormals = cloud.has_normals();
  PointCloud out;
  bool anyMissing = false;
  std::size_t begin = 0;
  while (begin < entries.size()) {
    std::size_t end = begin + 1;
    while (end < entries.size() && entries[end].cell == entries[begin].cell) ++end;
    Vec3 sum = Vec3::Zero();
    Vec3 nsum = Vec3::Zero();
    for (auto i = begin; i < end; ++i) {
      sum += cloud.points[entries[i].id];
      if (withNormals && cloud.normal_valid(entries[i].id)) nsum += cloud.normals[entries[i].id];
    }
    out.points.push_back(sum / static_cast<double>(end - begin));
    if (withNormals) {
      const double len = nsum.norm();
      if (len > 1e-12) {
        out.normals.push_back(nsum / len);
        out.normalMissing.push_back(0);
      } else {
        out.normals.push_back(Vec3::Zero());
        out.normalMissing.push_back(1);
        anyMissing = true;
      }
    }
    begin = end;
  }
  if (!anyMissing) out.normalMissing.clear();
  return out;
}

}  // namespace leafrecon

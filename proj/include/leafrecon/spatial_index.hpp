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

#include <cstdint>
#include <span>
#include <vector>

#include "leafrecon/core.hpp"

namespace leafrecon {

struct Neighbor {
  std::size_t id;
  double distance;
};

/// Immutable k-d tree over a copy of the input points.
///
/// Nodes split the widest axis of their bounding box at the median. Queries
/// are exact: knn() returns the same ids as a linear scan, with ties on
/// distance resolved towards the lower point id, and radius queries use the
/// closed ball. Concurrent queries on a built index are safe.
class SpatialIndex {
 public:
  static constexpr std::size_t kDefaultLeafSize = 16;

  SpatialIndex() = default;
  explicit SpatialIndex(std::span<const Vec3> points,
                        std::size_t leafSize = kDefaultLeafSize);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Vec3& point(std::size_t id) const { return points_[id]; }
  std::span<const Vec3> points() const { return points_; }

  /// Depth of the deepest leaf; a single leaf has depth 0.
  int depth() const noexcept { return depth_; }

  /// k nearest points sorted by (distance, id). Requires 1 <= k <= size().
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;

  /// Nearest point, ties resolved to the lower id.
  Neighbor nearest(const Vec3& query) const;

  /// Ids with distance <= r, ascending. Requires r >= 0.
  std::vector<std::size_t> radius_search(const Vec3& query, double r) const;

  /// Number of points with distance <= r.
  std::size_t count_within(const Vec3& query, double r) const;

  /// True when some point lies within distance r.
  bool any_within(const Vec3& query, double r) const;

 private:
  struct Node {
    Vec3 lo, hi;  // bounding box of the node's points
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);

  void knn_recurse(std::int32_t node, const Vec3& q, std::size_t k,
                   std::vector<std::pair<double, std::uint32_t>>& heap) const;
  void radius_recurse(std::int32_t node, const Vec3& q, double r2,
                      std::vector<std::size_t>& out) const;
  std::size_t count_recurse(std::int32_t node, const Vec3& q, double r2) const;
  bool any_recurse(std::int32_t node, const Vec3& q, double r2) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leafSize_ = kDefaultLeafSize;
  int depth_ = 0;
};

}  // namespace leafrecon

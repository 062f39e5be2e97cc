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

#include "leafrecon/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace leafrecon {

namespace {

double box_distance2(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double below = lo[k] - q[k];
    const double above = q[k] - hi[k];
    const double d = std::max({below, above, 0.0});
    d2 += d * d;
  }
  return d2;
}

double box_far_distance2(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = std::max(std::abs(q[k] - lo[k]), std::abs(q[k] - hi[k]));
    d2 += d * d;
  }
  return d2;
}

// Max-heap order on (distance^2, id): the worst candidate sits on top.
bool heap_less(const std::pair<double, std::uint32_t>& a,
               const std::pair<double, std::uint32_t>& b) {
  return a < b;
}

}  // namespace

SpatialIndex::SpatialIndex(std::span<const Vec3> points, std::size_t leafSize)
    : points_(points.begin(), points.end()), leafSize_(std::max<std::size_t>(leafSize, 1)) {
  if (points_.empty()) throw DataError("spatial index needs at least one point");
  if (points_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("spatial index supports at most 2^32-1 points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw DataError("spatial index: point " + std::to_string(i) + " is not finite");
    }
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / leafSize_ + 1);
  build(0, static_cast<std::uint32_t>(points_.size()), 0);
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (auto i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  depth_ = std::max(depth_, depth);

  const Vec3 extent = hi - lo;
  if (end - begin <= leafSize_ || extent.maxCoeff() == 0.0) return id;

  int axis = 0;
  extent.maxCoeff(&axis);
  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const auto left = build(begin, mid, depth + 1);
  const auto right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> SpatialIndex::knn(const Vec3& query, std::size_t k) const {
  if (k == 0 || k > points_.size()) {
    throw UsageError("knn: k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(points_.size()) + "]");
  }
  std::vector<std::pair<double, std::uint32_t>> heap;
  heap.reserve(k + 1);
  knn_recurse(0, query, k, heap);
  std::sort_heap(heap.begin(), heap.end(), heap_less);
  std::vector<Neighbor> out;
  out.reserve(k);
  for (const auto& [d2, id] : heap) out.push_back({id, std::sqrt(d2)});
  return out;
}

void SpatialIndex::knn_recurse(std::int32_t node, const Vec3& q, std::size_t k,
                               std::vector<std::pair<double, std::uint32_t>>& heap) const {
  const Node& n = nodes_[node];
  if (n.left < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      const auto id = order_[i];
      const std::pair<double, std::uint32_t> cand{(points_[id] - q).squaredNorm(), id};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), heap_less);
      } else if (heap_less(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), heap_less);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), heap_less);
      }
    }
    return;
  }
  const Node& l = nodes_[n.left];
  const Node& r = nodes_[n.right];
  const double dl = box_distance2(q, l.lo, l.hi);
  const double dr = box_distance2(q, r.lo, r.hi);
  const std::int32_t first = dl <= dr ? n.left : n.right;
  const std::int32_t second = dl <= dr ? n.right : n.left;
  const double dSecond = std::max(dl, dr);
  knn_recurse(first, q, k, heap);
  // Equal distances must still be visited so lower ids can win ties.
  if (heap.size() < k || dSecond <= heap.front().first) knn_recurse(second, q, k, heap);
}

Neighbor SpatialIndex::nearest(const Vec3& query) const { return knn(query, 1).front(); }

std::vector<std::size_t> SpatialIndex::radius_search(const Vec3& query, double r) const {
  if (!(r >= 0.0)) throw UsageError("radius_search: negative radius");
  std::vector<std::size_t> out;
  radius_recurse(0, query, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void SpatialIndex::radius_recurse(std::int32_t node, const Vec3& q, double r2,
                                  std::vector<std::size_t>& out) const {
  const Node& n = nodes_[node];
  if (box_distance2(q, n.lo, n.hi) > r2) return;
  if (n.left < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      if ((points_[order_[i]] - q).squaredNorm() <= r2) out.push_back(order_[i]);
    }
    return;
  }
  radius_recurse(n.left, q, r2, out);
  radius_recurse(n.right, q, r2, out);
}

std::size_t SpatialIndex::count_within(const Vec3& query, double r) const {
  if (!(r >= 0.0)) throw UsageError("count_within: negative radius");
  return count_recurse(0, query, r * r);
}

std::size_t SpatialIndex::count_recurse(std::int32_t node, const Vec3& q, double r2) const {
  const Node& n = nodes_[node];
  if (box_distance2(q, n.lo, n.hi) > r2) return 0;
  // Whole node inside the ball. The slack keeps the shortcut consistent with
  // the rounding of the per-point test.
  if (box_far_distance2(q, n.lo, n.hi) < r2 * (1.0 - 1e-12)) return n.end - n.begin;
  if (n.left < 0) {
    std::size_t c = 0;
    for (auto i = n.begin; i < n.end; ++i) {
      if ((points_[order_[i]] - q).squaredNorm() <= r2) ++c;
    }
    return c;
  }
  return count_recurse(n.left, q, r2) + count_recurse(n.right, q, r2);
}

bool SpatialIndex::any_within(const Vec3& query, double r) const {
  if (!(r >= 0.0)) throw UsageError("any_within: negative radius");
  return any_recurse(0, query, r * r);
}

bool SpatialIndex::any_recurse(std::int32_t node, const Vec3& q, double r2) const {
  const Node& n = nodes_[node];
  if (box_distance2(q, n.lo, n.hi) > r2) return false;
  if (n.left < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      if ((points_[order_[i]] - q).squaredNorm() <= r2) return true;
    }
    return false;
  }
  const Node& l = nodes_[n.left];
  const Node& r = nodes_[n.right];
  const bool leftFirst = box_distance2(q, l.lo, l.hi) <= box_distance2(q, r.lo, r.hi);
  return leftFirst ? (any_recurse(n.left, q, r2) || any_recurse(n.right, q, r2))
                   : (any_recurse(n.right, q, r2) || any_recurse(n.left, q, r2));
}

}  // namespace leafrecon

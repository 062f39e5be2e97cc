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

#include "leafrecon/normals.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "leafrecon/preprocess.hpp"
#include "leafrecon/spatial_index.hpp"

namespace leafrecon {

namespace {

/// Union-find with path halving; used for Kruskal.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;  // root is always the smallest id
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

PointCloud estimate_normals(const PointCloud& cloud, int k, unsigned workers) {
  const std::size_t n = cloud.size();
  if (k < 3 || static_cast<std::size_t>(k) > n) {
    throw UsageError("estimate_normals: need 3 <= k <= N (k=" + std::to_string(k) +
                     ", N=" + std::to_string(n) + ")");
  }
  const SpatialIndex index(cloud.points);
  PointCloud out;
  out.points = cloud.points;
  out.normals.assign(n, Vec3::Zero());
  out.normalMissing.assign(n, 0);

  parallel_for(n, workers, [&](std::size_t i) {
    const auto nbrs = index.knn(cloud.points[i], static_cast<std::size_t>(k));
    Vec3 mean = Vec3::Zero();
    for (const auto& nb : nbrs) mean += cloud.points[nb.id];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& nb : nbrs) {
      const Vec3 d = cloud.points[nb.id] - mean;
      cov.noalias() += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 lambda = eig.eigenvalues();  // ascending
    // A plane needs two non-vanishing spreads; coincident or collinear
    // neighbourhoods leave the normal undetermined.
    if (!(lambda[2] > 0.0) || lambda[1] <= 1e-12 * lambda[2]) {
      out.normalMissing[i] = 1;
      return;
    }
    out.normals[i] = eig.eigenvectors().col(0).normalized();
  });

  const auto flagged = std::count(out.normalMissing.begin(), out.normalMissing.end(), 1);
  if (flagged > 0) spdlog::warn("estimate_normals: {} degenerate neighbourhoods", flagged);
  else out.normalMissing.clear();
  return out;
}

OrientationGraph build_orientation_graph(std::span<const Vec3> points,
                                         std::span<const Vec3> normals,
                                         std::span<const std::uint8_t> skip,
                                         int neighbors, double cutoff) {
  OrientationGraph graph;
  graph.vertexCount = points.size();
  graph.cutoff = cutoff;
  if (points.empty()) return graph;
  const SpatialIndex index(points);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(neighbors) + 1,
                                              points.size());
  auto skipped = [&](std::size_t i) { return !skip.empty() && skip[i] != 0; };
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (skipped(i)) continue;
    for (const auto& nb : index.knn(points[i], k)) {
      if (nb.id == i || skipped(nb.id) || nb.distance > cutoff) continue;
      const auto a = static_cast<std::uint32_t>(std::min(i, nb.id));
      const auto b = static_cast<std::uint32_t>(std::max(i, nb.id));
      const double w = 1.0 - std::abs(normals[a].dot(normals[b]));
      graph.edges.push_back({a, b, std::clamp(w, 0.0, 1.0)});
    }
  }
  // Neighbour relations are not symmetric; keep one copy of each pair.
  std::sort(graph.edges.begin(), graph.edges.end(), [](const auto& x, const auto& y) {
    return std::pair(x.i, x.j) < std::pair(y.i, y.j);
  });
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end(),
                                [](const auto& x, const auto& y) {
                                  return x.i == y.i && x.j == y.j;
                                }),
                    graph.edges.end());
  return graph;
}

OrientationResult orient_normals(const PointCloud& input, double coarseGridStep,
                                 int graphNbrs, int pcaNbrs, unsigned workers) {
  if (!(coarseGridStep > 0.0)) throw UsageError("orient_normals: coarseGridStep must be > 0");
  if (graphNbrs < 1) throw UsageError("orient_normals: graphNbrs must be >= 1");
  if (input.size() < 3) {
    throw DataError(fmt::format("orient_normals: need at least 3 points, got {}", input.size()));
  }

  OrientationResult result;
  result.cloud = input.has_normals()
                     ? input
                     : estimate_normals(input, std::min<int>(pcaNbrs, static_cast<int>(input.size())),
                                        workers);
  PointCloud& cloud = result.cloud;

  // Coarse copy with its own PCA normals.
  PointCloud coarse = grid_downsample(PointCloud{cloud.points, {}, {}}, coarseGridStep);
  if (coarse.size() < 3) {
    throw DataError("orient_normals: coarse grid leaves fewer than 3 points; "
                    "cloud without estimable normals");
  }
  coarse = estimate_normals(coarse, std::min<int>(pcaNbrs, static_cast<int>(coarse.size())),
                            workers);
  const std::size_t nc = coarse.size();
  auto coarseValid = [&](std::size_t i) { return coarse.normal_valid(i); };
  if (std::none_of(coarse.normalMissing.begin(), coarse.normalMissing.end(),
                   [](auto f) { return f == 0; }) &&
      !coarse.normalMissing.empty()) {
    throw DataError("orient_normals: cloud without estimable normals");
  }

  result.graph = build_orientation_graph(coarse.points, coarse.normals, coarse.normalMissing,
                                         graphNbrs, 2.0 * coarseGridStep);

  // Kruskal on (weight, i, j): deterministic minimal spanning forest.
  std::vector<std::size_t> order(result.graph.edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& edges = result.graph.edges;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (edges[a].weight != edges[b].weight) return edges[a].weight < edges[b].weight;
    return a < b;
  });
  DisjointSets sets(nc);
  std::vector<std::vector<std::uint32_t>> tree(nc);
  for (const auto e : order) {
    if (sets.unite(edges[e].i, edges[e].j)) {
      tree[edges[e].i].push_back(edges[e].j);
      tree[edges[e].j].push_back(edges[e].i);
    }
  }
  for (auto& adj : tree) std::sort(adj.begin(), adj.end());

  // Breadth-first walk from the smallest id of every component.
  std::vector<Vec3>& cn = coarse.normals;
  std::vector<char> visited(nc, 0);
  result.coarseLabels.assign(nc, -1);
  int component = 0;
  for (std::size_t root = 0; root < nc; ++root) {
    if (visited[root] || !coarseValid(root)) continue;
    std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(root)};
    visited[root] = 1;
    result.coarseLabels[root] = component;
    while (!queue.empty()) {
      const auto i = queue.front();
      queue.pop_front();
      for (const auto j : tree[i]) {
        if (visited[j]) continue;
        visited[j] = 1;
        result.coarseLabels[j] = component;
        if (cn[i].dot(cn[j]) < 0.0) cn[j] = -cn[j];
        result.traversal.emplace_back(i, j);
        queue.push_back(j);
      }
    }
    ++component;
  }
  result.componentCount = static_cast<std::size_t>(component);

  // Propagate to the full cloud. Every coarse point flips the normals within
  // coarseGridStep; points out of reach follow their nearest coarse point.
  std::vector<std::uint32_t> validCoarse;
  for (std::size_t i = 0; i < nc; ++i) {
    if (coarseValid(i)) validCoarse.push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<Vec3> validPts;
  validPts.reserve(validCoarse.size());
  for (auto i : validCoarse) validPts.push_back(coarse.points[i]);
  const SpatialIndex coarseIndex(validPts);
  const SpatialIndex fullIndex(cloud.points);

  std::vector<char> reached(cloud.size(), 0);
  for (const auto ci : validCoarse) {
    for (const auto j : fullIndex.radius_search(coarse.points[ci], coarseGridStep)) {
      if (!cloud.normal_valid(j)) continue;
      if (cn[ci].dot(cloud.normals[j]) < 0.0) cloud.normals[j] = -cloud.normals[j];
      reached[j] = 1;
    }
  }

  result.labels.assign(cloud.size(), -1);
  std::size_t unreached = 0;
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    if (!cloud.normal_valid(j)) continue;
    const auto nearest = validCoarse[coarseIndex.nearest(cloud.points[j]).id];
    result.labels[j] = result.coarseLabels[nearest];
    if (!reached[j]) {
      ++unreached;
      if (cn[nearest].dot(cloud.normals[j]) < 0.0) cloud.normals[j] = -cloud.normals[j];
    }
  }
  if (unreached > 0) {
    spdlog::debug("orient_normals: {} points oriented by their nearest coarse point", unreached);
  }

  // Renumber components by their smallest full-resolution member id.
  std::vector<int> remap(result.componentCount, -1);
  int next = 0;
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    const int c = result.labels[j];
    if (c >= 0 && remap[c] < 0) remap[c] = next++;
  }
  for (auto& c : result.labels) {
    if (c >= 0) c = remap[c];
  }
  for (auto& c : result.coarseLabels) {
    if (c >= 0) c = remap[c];
  }
  result.componentCount = static_cast<std::size_t>(next);

  result.coarsePoints = std::move(coarse.points);
  result.coarseNormals = std::move(cn);
  return result;
}

AugmentedDataset augment_offsets(const PointCloud& cloud, double L) {
  if (!(L > 0.0)) throw UsageError("augment_offsets: L must be > 0");
  if (!cloud.has_normals()) throw DataError("augment_offsets: cloud has no normals");
  const std::size_t n = cloud.size();

  AugmentedDataset data;
  data.offset = L;
  data.sites = cloud.points;
  data.values.assign(n, 0.0);
  data.parent.resize(n);
  std::iota(data.parent.begin(), data.parent.end(), 0u);
  data.onSurface = n;

  const SpatialIndex surface(cloud.points);
  for (const double sign : {1.0, -1.0}) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!cloud.normal_valid(i)) {
        ++data.discarded;
        continue;
      }
      const Vec3 site = cloud.points[i] + sign * L * cloud.normals[i];
      const auto nearest = surface.nearest(site);
      if (nearest.id != i && nearest.distance < 0.5 * L) {
        ++data.discarded;
        continue;
      }
      data.sites.push_back(site);
      data.values.push_back(sign * L);
      data.parent.push_back(static_cast<std::uint32_t>(i));
      ++data.offSurface;
    }
  }
  if (data.discarded > 0) {
    spdlog::info("augment_offsets: {} offset sites discarded", data.discarded);
  }
  return data;
}

}  // namespace leafrecon

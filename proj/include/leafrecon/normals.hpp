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

#include <utility>
#include <vector>

#include "leafrecon/core.hpp"

namespace leafrecon {

/// Weighted neighbour graph over the coarse copy of the cloud. Edge weight is
/// 1 - |n_i . n_j|, so nearly parallel normals are cheap to traverse.
struct OrientationGraph {
  struct Edge {
    std::uint32_t i, j;  // i < j
    double weight;
  };
  std::size_t vertexCount = 0;
  double cutoff = 0.0;  // maximum edge length
  std::vector<Edge> edges;
};

/// Per-point component id. Components are numbered by their smallest member
/// id, so labels do not depend on traversal details.
using ComponentLabels = std::vector<int>;

struct OrientationResult {
  PointCloud cloud;          // input cloud with consistently signed normals
  ComponentLabels labels;    // per input point; -1 for points without a normal
  std::size_t componentCount = 0;

  // Diagnostics of the coarse pass.
  std::vector<Vec3> coarsePoints;
  std::vector<Vec3> coarseNormals;  // after orientation; zero when degenerate
  ComponentLabels coarseLabels;
  OrientationGraph graph;
  /// Spanning-forest edges (parent, child) in breadth-first visiting order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> traversal;
};

/// PCA normals from the k nearest neighbours (the point itself included).
/// Points whose neighbourhood has no well-defined plane are flagged in
/// `normalMissing`. Signs are arbitrary.
PointCloud estimate_normals(const PointCloud& cloud, int k, unsigned workers = 0);

/// Builds the orientation graph over `points` with their `normals`: each
/// vertex links to its `neighbors` nearest points, dropping any farther than
/// `cutoff`. Vertices flagged in `skip` get no edges.
OrientationGraph build_orientation_graph(std::span<const Vec3> points,
                                         std::span<const Vec3> normals,
                                         std::span<const std::uint8_t> skip,
                                         int neighbors, double cutoff);

/// Consistent normal orientation via a coarse minimal spanning forest.
///
/// The cloud is downsampled on a grid of `coarseGridStep`, PCA normals are
/// computed there with `pcaNbrs`, and a graph over `graphNbrs` neighbours
/// within 2*coarseGridStep is reduced to a Kruskal spanning forest. A
/// breadth-first walk from the lowest id of each component flips children
/// that disagree with their parent. Full-resolution normals within
/// coarseGridStep of a coarse point are then flipped to agree with it; any
/// point out of reach of every coarse point follows its nearest one.
///
/// If the input has no normals they are estimated with `pcaNbrs` first.
OrientationResult orient_normals(const PointCloud& cloud, double coarseGridStep,
                                 int graphNbrs, int pcaNbrs, unsigned workers = 0);

/// Builds the 3N constraints (x, 0), (x + L n, +L), (x - L n, -L).
///
/// An offset site is dropped when its nearest on-surface point is not its
/// parent and lies closer than L/2; the opposite offset of the same parent
/// is judged on its own. Points without a valid normal contribute only
/// their on-surface constraint; their two missing offsets count as
/// discarded.
AugmentedDataset augment_offsets(const PointCloud& cloud, double L);

}  // namespace leafrecon

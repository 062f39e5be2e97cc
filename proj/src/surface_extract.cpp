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

#include "leafrecon/surface_extract.hpp"

#include <atomic>
#include <limits>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/os.h>
#include <spdlog/spdlog.h>

namespace leafrecon {

namespace {

// Cuts closer than this fraction of an edge to a node land on the node.
constexpr double kSnap = 1e-6;

// Cube corner c has offset (c & 1, (c >> 1) & 1, (c >> 2) & 1).
constexpr int kTets[6][4] = {
    {0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7},
};

struct EdgeCut {
  int neg, pos;  // local vertex ids
};

/// Triangles of one tetrahedron as triples of cut edges, in no particular
/// winding; the caller orients them.
int cut_tetrahedron(const std::array<double, 4>& v, std::array<std::array<EdgeCut, 3>, 2>& out) {
  int negs[4], poss[4];
  int nn = 0, np = 0;
  for (int i = 0; i < 4; ++i) {
    if (v[i] < 0.0) negs[nn++] = i;
    else poss[np++] = i;
  }
  if (nn == 0 || np == 0) return 0;
  if (nn == 1) {
    out[0] = {EdgeCut{negs[0], poss[0]}, EdgeCut{negs[0], poss[1]}, EdgeCut{negs[0], poss[2]}};
    return 1;
  }
  if (np == 1) {
    out[0] = {EdgeCut{negs[0], poss[0]}, EdgeCut{negs[1], poss[0]}, EdgeCut{negs[2], poss[0]}};
    return 1;
  }
  // Two and two: the cut is a quad a-c, a-d, b-d, b-c.
  const int a = negs[0], b = negs[1], c = poss[0], d = poss[1];
  out[0] = {EdgeCut{a, c}, EdgeCut{a, d}, EdgeCut{b, d}};
  out[1] = {EdgeCut{a, c}, EdgeCut{b, d}, EdgeCut{b, c}};
  return 2;
}

Vec3 cut_point(const Vec3& pn, const Vec3& pp, double vn, double vp) {
  const double t = vn / (vn - vp);
  return pn + t * (pp - pn);
}

/// Direction from the negative corners' mean to the positive corners' mean;
/// for a linear field this has a positive dot product with its gradient.
Vec3 uphill(const std::array<Vec3, 4>& p, const std::array<double, 4>& v) {
  Vec3 neg = Vec3::Zero(), pos = Vec3::Zero();
  int nn = 0, np = 0;
  for (int i = 0; i < 4; ++i) {
    if (v[i] < 0.0) {
      neg += p[i];
      ++nn;
    } else {
      pos += p[i];
      ++np;
    }
  }
  return pos / np - neg / nn;
}

}  // namespace

SampleGrid make_grid(const BoundingBox& box, double h, double nodeBudget) {
  if (!(h > 0.0)) throw UsageError("sample grid: step must be > 0");
  if (box.empty()) throw DataError("sample grid: empty bounding box");
  SampleGrid grid;
  grid.step = h;
  grid.origin = box.min - Vec3::Constant(2.0 * h);
  const Vec3 top = box.max + Vec3::Constant(2.0 * h);
  double total = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double cells = std::ceil((top[a] - grid.origin[a]) / h);
    const double n = std::max(cells, 1.0) + 1.0;
    total *= n;
    if (total > nodeBudget) {
      throw UsageError(fmt::format(
          "sample grid: more than {:.3g} nodes at step {}; use a coarser isoGridStep", nodeBudget,
          h));
    }
    grid.dims[a] = static_cast<std::size_t>(n);
  }
  grid.values.assign(grid.node_count(), std::numeric_limits<double>::quiet_NaN());
  return grid;
}

SampleGrid sample_grid(const ImplicitField& field, double h, double nodeBudget, unsigned workers) {
  SampleGrid grid = make_grid(bounding_box(field.mask().index().points()), h, nodeBudget);
  const std::size_t plane = grid.dims[0] * grid.dims[1];
  parallel_for(grid.dims[2], workers, [&](std::size_t k) {
    for (std::size_t j = 0; j < grid.dims[1]; ++j) {
      for (std::size_t i = 0; i < grid.dims[0]; ++i) {
        const auto s = field.eval(grid.node(i, j, k));
        if (s.inDomain) grid.values[k * plane + j * grid.dims[0] + i] = *s.value;
      }
    }
  });
  return grid;
}

void save_grid(const SampleGrid& grid, const std::filesystem::path& path) {
  try {
    auto out = fmt::output_file(path.string());
    out.print("{:.12g} {:.12g} {:.12g}\n{:.12g}\n{} {} {}\n", grid.origin.x(), grid.origin.y(),
              grid.origin.z(), grid.step, grid.dims[0], grid.dims[1], grid.dims[2]);
    for (const double v : grid.values) {
      if (SampleGrid::masked(v)) out.print("nan\n");
      else out.print("{:.12g}\n", v);
    }
  } catch (const std::system_error& e) {
    throw DataError("cannot write " + path.string() + ": " + e.what());
  }
}

std::vector<std::array<Vec3, 3>> tetrahedron_triangles(const std::array<Vec3, 4>& corners,
                                                       const std::array<double, 4>& values) {
  std::array<std::array<EdgeCut, 3>, 2> cuts;
  const int count = cut_tetrahedron(values, cuts);
  std::vector<std::array<Vec3, 3>> out;
  const Vec3 up = count > 0 ? uphill(corners, values) : Vec3::Zero();
  for (int t = 0; t < count; ++t) {
    std::array<Vec3, 3> tri;
    for (int e = 0; e < 3; ++e) {
      const auto& c = cuts[t][e];
      tri[e] = cut_point(corners[c.neg], corners[c.pos], values[c.neg], values[c.pos]);
    }
    if ((tri[1] - tri[0]).cross(tri[2] - tri[0]).dot(up) < 0.0) std::swap(tri[1], tri[2]);
    out.push_back(tri);
  }
  return out;
}

TriangleMesh marching_tetrahedra(const SampleGrid& grid) {
  TriangleMesh mesh;
  const auto [nx, ny, nz] = grid.dims;
  if (nx < 2 || ny < 2 || nz < 2) return mesh;

  double scale = 0.0;
  for (const double v : grid.values) {
    if (!SampleGrid::masked(v)) scale = std::max(scale, std::abs(v));
  }
  const double bump = 1e-12 * (scale > 0.0 ? scale : 1.0);
  auto node_value = [&](std::size_t id) {
    const double v = grid.values[id];
    return v == 0.0 ? bump : v;
  };

  const double minArea = 1e-14 * grid.step * grid.step;
  std::unordered_map<std::uint64_t, std::uint32_t> vertexOf;
  const auto total = static_cast<std::uint64_t>(grid.node_count());

  std::size_t dropped = 0, collapsed = 0;
  for (std::size_t k = 0; k + 1 < nz; ++k) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        std::array<std::size_t, 8> ids;
        std::array<Vec3, 8> pos;
        std::array<double, 8> val;
        bool skip = false;
        for (int c = 0; c < 8; ++c) {
          const std::size_t ci = i + (c & 1), cj = j + ((c >> 1) & 1), ck = k + ((c >> 2) & 1);
          ids[c] = grid.index(ci, cj, ck);
          if (SampleGrid::masked(grid.values[ids[c]])) {
            skip = true;
            break;
          }
          val[c] = node_value(ids[c]);
          pos[c] = grid.node(ci, cj, ck);
        }
        if (skip) continue;
        const bool anyNeg = std::any_of(val.begin(), val.end(), [](double v) { return v < 0; });
        const bool anyPos = std::any_of(val.begin(), val.end(), [](double v) { return v > 0; });
        if (!anyNeg || !anyPos) continue;

        for (const auto& tet : kTets) {
          std::array<double, 4> tv;
          std::array<Vec3, 4> tp;
          for (int q = 0; q < 4; ++q) {
            tv[q] = val[tet[q]];
            tp[q] = pos[tet[q]];
          }
          std::array<std::array<EdgeCut, 3>, 2> cuts;
          const int count = cut_tetrahedron(tv, cuts);
          if (count == 0) continue;
          const Vec3 up = uphill(tp, tv);
          for (int t = 0; t < count; ++t) {
            std::array<std::uint32_t, 3> tri;
            for (int e = 0; e < 3; ++e) {
              const auto& cut = cuts[t][e];
              const std::uint64_t a = ids[tet[cut.neg]], b = ids[tet[cut.pos]];
              // A cut this close to a node is snapped onto it and shared by
              // every edge of that node, so slivers collapse instead of
              // leaving holes when they are removed.
              const double t = tv[cut.neg] / (tv[cut.neg] - tv[cut.pos]);
              std::uint64_t key;
              Vec3 where;
              if (t <= kSnap) {
                key = total * total + a;
                where = tp[cut.neg];
              } else if (t >= 1.0 - kSnap) {
                key = total * total + b;
                where = tp[cut.pos];
              } else {
                key = std::min(a, b) * total + std::max(a, b);
                where = tp[cut.neg] + t * (tp[cut.pos] - tp[cut.neg]);
              }
              auto [it, inserted] =
                  vertexOf.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
              if (inserted) mesh.vertices.push_back(where);
              tri[e] = it->second;
            }
            if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
              ++collapsed;
              continue;
            }
            const Vec3& p0 = mesh.vertices[tri[0]];
            const Vec3 normal =
                (mesh.vertices[tri[1]] - p0).cross(mesh.vertices[tri[2]] - p0);
            if (0.5 * normal.norm() <= minArea) {
              ++dropped;
              continue;
            }
            if (normal.dot(up) < 0.0) std::swap(tri[1], tri[2]);
            mesh.triangles.push_back(tri);
          }
        }
      }
    }
  }
  if (dropped + collapsed > 0) {
    spdlog::debug("marching_tetrahedra: {} triangles collapsed at nodes, {} degenerate dropped",
                  collapsed, dropped);
  }

  // Removed triangles can leave vertices unreferenced; compact them.
  if (dropped + collapsed > 0) {
    std::vector<std::uint32_t> remap(mesh.vertices.size(), UINT32_MAX);
    std::vector<Vec3> kept;
    for (auto& tri : mesh.triangles) {
      for (auto& v : tri) {
        if (remap[v] == UINT32_MAX) {
          remap[v] = static_cast<std::uint32_t>(kept.size());
          kept.push_back(mesh.vertices[v]);
        }
        v = remap[v];
      }
    }
    mesh.vertices = std::move(kept);
  }
  return mesh;
}

std::size_t attach_curvature(TriangleMesh& mesh, const ImplicitField& field, unsigned workers) {
  std::vector<double> curvature(mesh.vertices.size(), std::numeric_limits<double>::quiet_NaN());
  std::atomic<std::size_t> failed{0};
  parallel_for(mesh.vertices.size(), workers, [&](std::size_t v) {
    try {
      curvature[v] = field.mean_curvature(mesh.vertices[v]);
    } catch (const Error&) {
      ++failed;
    }
  });
  if (failed > 0) spdlog::warn("attach_curvature: curvature undefined at {} vertices", failed.load());
  mesh.vertexScalars["mean_curvature"] = std::move(curvature);
  return failed;
}

}  // namespace leafrecon

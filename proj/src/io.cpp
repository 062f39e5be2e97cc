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

#include "leafrecon/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <fmt/os.h>

namespace leafrecon {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

double to_double(std::string_view tok, const std::filesystem::path& path,
                 std::size_t line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError(where(path, line) + ": cannot parse number '" + std::string(tok) + "'");
  }
  return v;
}

long long to_integer(std::string_view tok, const std::filesystem::path& path,
                     std::size_t line) {
  long long v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError(where(path, line) + ": cannot parse integer '" + std::string(tok) + "'");
  }
  return v;
}

Vec3 finite_point(std::span<const std::string_view> toks, const std::filesystem::path& path,
                  std::size_t line) {
  Vec3 p(to_double(toks[0], path, line), to_double(toks[1], path, line),
         to_double(toks[2], path, line));
  if (!p.allFinite()) throw DataError(where(path, line) + ": non-finite coordinate");
  return p;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

/// Minimal ASCII PLY header model: ordered elements with scalar or list
/// properties.
struct PlyProperty {
  std::string name;
  bool isList = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;

  std::optional<std::size_t> index_of(std::string_view prop) const {
    for (std::size_t i = 0; i < properties.size(); ++i) {
      if (properties[i].name == prop) return i;
    }
    return std::nullopt;
  }
};

struct PlyReader {
  std::ifstream in;
  std::filesystem::path path;
  std::size_t lineNo = 0;
  std::vector<PlyElement> elements;

  explicit PlyReader(const std::filesystem::path& p) : in(open_input(p)), path(p) {
    std::string line;
    if (!next(line) || split_ws(line) != std::vector<std::string_view>{"ply"}) {
      throw DataError(where(path, lineNo) + ": missing 'ply' magic");
    }
    bool sawFormat = false;
    for (;;) {
      if (!next(line)) throw DataError(where(path, lineNo) + ": unterminated header");
      const auto toks = split_ws(line);
      if (toks.empty()) continue;
      if (toks[0] == "end_header") break;
      if (toks[0] == "comment" || toks[0] == "obj_info") continue;
      if (toks[0] == "format") {
        if (toks.size() < 2 || toks[1] != "ascii") {
          throw DataError(where(path, lineNo) + ": only ASCII PLY is supported");
        }
        sawFormat = true;
      } else if (toks[0] == "element") {
        if (toks.size() != 3) throw DataError(where(path, lineNo) + ": bad element line");
        const auto n = to_integer(toks[2], path, lineNo);
        if (n < 0) throw DataError(where(path, lineNo) + ": negative element count");
        elements.push_back({std::string(toks[1]), static_cast<std::size_t>(n), {}});
      } else if (toks[0] == "property") {
        if (elements.empty()) {
          throw DataError(where(path, lineNo) + ": property before element");
        }
        if (toks.size() == 5 && toks[1] == "list") {
          elements.back().properties.push_back({std::string(toks[4]), true});
        } else if (toks.size() == 3) {
          elements.back().properties.push_back({std::string(toks[2]), false});
        } else {
          throw DataError(where(path, lineNo) + ": bad property line");
        }
      } else {
        throw DataError(where(path, lineNo) + ": unexpected header line");
      }
    }
    if (!sawFormat) throw DataError(path.string() + ": missing format line");
  }

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++lineNo;
    return true;
  }

  /// Reads one record; list properties are flattened to their items.
  std::vector<std::string_view> record(const PlyElement& e, std::string& storage) {
    for (;;) {
      if (!next(storage)) {
        throw DataError(where(path, lineNo) + ": unexpected end of " + e.name + " data");
      }
      auto toks = split_ws(storage);
      if (toks.empty()) continue;
      return toks;
    }
  }
};

std::string fmt_num(double v) { return fmt::format("{:.12g}", v); }

}  // namespace

CloudFormat cloud_format_for(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  if (ext == ".ply") return CloudFormat::ply_ascii;
  if (ext == ".xyz" || ext == ".txt" || ext == ".pts") return CloudFormat::xyz;
  throw UsageError("cannot infer point cloud format from '" + path.string() + "'");
}

MeshFormat mesh_format_for(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  if (ext == ".ply") return MeshFormat::ply_ascii;
  if (ext == ".obj") return MeshFormat::obj;
  throw UsageError("cannot infer mesh format from '" + path.string() + "'");
}

PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format) {
  PointCloud cloud;
  if (format == CloudFormat::xyz) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineNo = 0;
    std::optional<bool> withNormals;
    while (std::getline(in, line)) {
      ++lineNo;
      std::string_view view(line);
      if (const auto hash = view.find('#'); hash != std::string_view::npos) {
        view = view.substr(0, hash);
      }
      const auto toks = split_ws(view);
      if (toks.empty()) continue;
      if (toks.size() != 3 && toks.size() != 6) {
        throw DataError(where(path, lineNo) + ": expected 3 or 6 columns, got " +
                        std::to_string(toks.size()));
      }
      const bool hasN = toks.size() == 6;
      if (withNormals && *withNormals != hasN) {
        throw DataError(where(path, lineNo) + ": inconsistent column count");
      }
      withNormals = hasN;
      cloud.points.push_back(finite_point(toks, path, lineNo));
      if (hasN) {
        const Vec3 n = finite_point(std::span(toks).subspan(3), path, lineNo);
        const double len = n.norm();
        if (!(len > 0.0)) throw DataError(where(path, lineNo) + ": zero normal");
        cloud.normals.push_back(n / len);
      }
    }
  } else {
    PlyReader ply(path);
    std::string storage;
    for (const auto& e : ply.elements) {
      if (e.name != "vertex") {
        for (std::size_t r = 0; r < e.count; ++r) ply.record(e, storage);
        continue;
      }
      const auto ix = e.index_of("x"), iy = e.index_of("y"), iz = e.index_of("z");
      if (!ix || !iy || !iz) throw DataError(path.string() + ": vertex lacks x/y/z");
      const auto inx = e.index_of("nx"), iny = e.index_of("ny"), inz = e.index_of("nz");
      const bool hasN = inx && iny && inz;
      for (const auto& p : e.properties) {
        if (p.isList) throw DataError(path.string() + ": list property on vertex");
      }
      cloud.points.reserve(e.count);
      for (std::size_t r = 0; r < e.count; ++r) {
        const auto toks = ply.record(e, storage);
        if (toks.size() != e.properties.size()) {
          throw DataError(where(path, ply.lineNo) + ": expected " +
                          std::to_string(e.properties.size()) + " values");
        }
        const std::array<std::string_view, 3> xyz{toks[*ix], toks[*iy], toks[*iz]};
        cloud.points.push_back(finite_point(xyz, path, ply.lineNo));
        if (hasN) {
          const std::array<std::string_view, 3> nxyz{toks[*inx], toks[*iny], toks[*inz]};
          const Vec3 n = finite_point(nxyz, path, ply.lineNo);
          const double len = n.norm();
          if (!(len > 0.0)) throw DataError(where(path, ply.lineNo) + ": zero normal");
          cloud.normals.push_back(n / len);
        }
      }
    }
  }
  if (cloud.points.empty()) throw DataError(path.string() + ": no points");
  return cloud;
}

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                      CloudFormat format) {
  std::optional<fmt::ostream> out;
  try {
    out.emplace(fmt::output_file(path.string()));
  } catch (const std::system_error& e) {
    throw DataError("cannot write " + path.string() + ": " + e.what());
  }
  const bool hasN = cloud.has_normals();
  if (format == CloudFormat::ply_ascii) {
    out->print("ply\nformat ascii 1.0\nelement vertex {}\n", cloud.size());
    out->print("property float x\nproperty float y\nproperty float z\n");
    if (hasN) out->print("property float nx\nproperty float ny\nproperty float nz\n");
    out->print("end_header\n");
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out->print("{} {} {}", fmt_num(p.x()), fmt_num(p.y()), fmt_num(p.z()));
    if (hasN) {
      const auto& n = cloud.normals[i];
      out->print(" {} {} {}", fmt_num(n.x()), fmt_num(n.y()), fmt_num(n.z()));
    }
    out->print("\n");
  }
}

void save_labelled_normals(const PointCloud& cloud, std::span<const int> labels,
                           const std::filesystem::path& path) {
  if (labels.size() != cloud.size() || !cloud.has_normals()) {
    throw DataError("labelled normal dump needs one label and one normal per point");
  }
  std::vector<std::size_t> order(cloud.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  int current = -2;
  for (const auto i : order) {
    if (labels[i] != current) {
      current = labels[i];
      out << "# component " << current << '\n';
    }
    const auto& p = cloud.points[i];
    const auto& n = cloud.normals[i];
    out << fmt::format("{} {} {} {} {} {}\n", fmt_num(p.x()), fmt_num(p.y()),
                       fmt_num(p.z()), fmt_num(n.x()), fmt_num(n.y()), fmt_num(n.z()));
  }
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               MeshFormat format) {
  std::optional<fmt::ostream> out;
  try {
    out.emplace(fmt::output_file(path.string()));
  } catch (const std::system_error& e) {
    throw DataError("cannot write " + path.string() + ": " + e.what());
  }
  if (format == MeshFormat::obj) {
    for (const auto& v : mesh.vertices) {
      out->print("v {} {} {}\n", fmt_num(v.x()), fmt_num(v.y()), fmt_num(v.z()));
    }
    for (const auto& t : mesh.triangles) {
      out->print("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    return;
  }
  out->print("ply\nformat ascii 1.0\nelement vertex {}\n", mesh.vertices.size());
  out->print("property float x\nproperty float y\nproperty float z\n");
  for (const auto& [name, values] : mesh.vertexScalars) {
    out->print("property float {}\n", name);
  }
  out->print("element face {}\nproperty list uchar int vertex_indices\nend_header\n",
             mesh.triangles.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    out->print("{} {} {}", fmt_num(v.x()), fmt_num(v.y()), fmt_num(v.z()));
    for (const auto& [name, values] : mesh.vertexScalars) {
      out->print(" {}", fmt_num(values[i]));
    }
    out->print("\n");
  }
  for (const auto& t : mesh.triangles) out->print("3 {} {} {}\n", t[0], t[1], t[2]);
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  TriangleMesh mesh;
  auto index = [&](long long raw, std::size_t line) {
    if (raw < 0) throw DataError(where(path, line) + ": negative vertex index");
    return static_cast<std::uint32_t>(raw);
  };
  if (format == MeshFormat::obj) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
      ++lineNo;
      const auto toks = split_ws(line);
      if (toks.empty() || toks[0].starts_with('#')) continue;
      if (toks[0] == "v") {
        if (toks.size() < 4) throw DataError(where(path, lineNo) + ": short vertex");
        mesh.vertices.push_back(finite_point(std::span(toks).subspan(1), path, lineNo));
      } else if (toks[0] == "f") {
        if (toks.size() != 4) throw DataError(where(path, lineNo) + ": only triangles supported");
        std::array<std::uint32_t, 3> tri{};
        for (int k = 0; k < 3; ++k) {
          const auto slash = toks[k + 1].find('/');
          tri[k] = index(to_integer(toks[k + 1].substr(0, slash), path, lineNo) - 1, lineNo);
        }
        mesh.triangles.push_back(tri);
      }
    }
  } else {
    PlyReader ply(path);
    std::string storage;
    for (const auto& e : ply.elements) {
      if (e.name == "vertex") {
        const auto ix = e.index_of("x"), iy = e.index_of("y"), iz = e.index_of("z");
        if (!ix || !iy || !iz) throw DataError(path.string() + ": vertex lacks x/y/z");
        std::vector<std::pair<std::string, std::size_t>> extra;
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          if (k != *ix && k != *iy && k != *iz) extra.emplace_back(e.properties[k].name, k);
        }
        for (const auto& [name, k] : extra) mesh.vertexScalars[name].reserve(e.count);
        for (std::size_t r = 0; r < e.count; ++r) {
          const auto toks = ply.record(e, storage);
          if (toks.size() != e.properties.size()) {
            throw DataError(where(path, ply.lineNo) + ": wrong vertex value count");
          }
          const std::array<std::string_view, 3> xyz{toks[*ix], toks[*iy], toks[*iz]};
          mesh.vertices.push_back(finite_point(xyz, path, ply.lineNo));
          for (const auto& [name, k] : extra) {
            mesh.vertexScalars[name].push_back(to_double(toks[k], path, ply.lineNo));
          }
        }
      } else if (e.name == "face") {
        for (std::size_t r = 0; r < e.count; ++r) {
          const auto toks = ply.record(e, storage);
          if (toks.size() != 4 || toks[0] != "3") {
            throw DataError(where(path, ply.lineNo) + ": only triangles supported");
          }
          mesh.triangles.push_back({index(to_integer(toks[1], path, ply.lineNo), ply.lineNo),
                                    index(to_integer(toks[2], path, ply.lineNo), ply.lineNo),
                                    index(to_integer(toks[3], path, ply.lineNo), ply.lineNo)});
        }
      } else {
        for (std::size_t r = 0; r < e.count; ++r) ply.record(e, storage);
      }
    }
  }
  mesh.validate();
  return mesh;
}

}  // namespace leafrecon

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


#include <doctest.h>

#include <cmath>
#include <string>

#include "leafrecon/config.hpp"
#include "leafrecon/core.hpp"
#include "leafrecon/io.hpp"
#include "scratch.hpp"

using namespace leafrecon;
using test::TempDir;
using test::read_file;
using test::write_file;

namespace {

ConfigErrc code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.code();
  }
  FAIL("config was accepted: " << text);
  return ConfigErrc::bad_value;
}

std::size_t count_lines_starting(const std::string& text, const std::string& prefix) {
  std::size_t n = 0, pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    if (text.compare(pos, prefix.size(), prefix) == 0) ++n;
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return n;
}

TriangleMesh tetra_mesh() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1.25}};
  m.triangles = {{{0, 2, 1}}, {{0, 1, 3}}, {{1, 2, 3}}, {{0, 3, 2}}};
  return m;
}

}  // namespace

TEST_CASE("defaults validate and the capsicum outlier setting is accepted") {
  Config c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.denoiseNbrs == 50);
  CHECK(c.denoiseThreshold == 0.15);
  CHECK(c.offset_length() == doctest::Approx(2.0 * c.gridStep));
  CHECK(c.alpha_radius() == doctest::Approx(5.0 * c.offset_length()));
}

TEST_CASE("every constraint violation has its own code") {
  CHECK(code_of("nMin = 10\nnMax = 5\n") == ConfigErrc::nmin_exceeds_nmax);
  CHECK(code_of("splineOrder=1\n") == ConfigErrc::order_not_positive);
  CHECK(code_of("smoothing=-1e-3\n") == ConfigErrc::negative_smoothing);
  CHECK(code_of("expand=0.9\n") == ConfigErrc::expand_below_one);
  CHECK(code_of("gridStep=0\n") == ConfigErrc::nonpositive_length);
  CHECK(code_of("offsetL=-1\n") == ConfigErrc::nonpositive_length);
  CHECK(code_of("alpha=0\n") == ConfigErrc::nonpositive_length);
  CHECK(code_of("isoGridStep=-0.1\n") == ConfigErrc::nonpositive_length);
  CHECK(code_of("coarseGridStep=0\n") == ConfigErrc::nonpositive_length);
  CHECK(code_of("pcaNbrs=2\n") == ConfigErrc::invalid_count);
  CHECK(code_of("gcvLow=1\ngcvHigh=0.5\n") == ConfigErrc::invalid_gcv_bracket);
  CHECK(code_of("dimension=2\n") == ConfigErrc::unsupported_dimension);
  CHECK(code_of("splineOrder=7\n") == ConfigErrc::unsupported_order);
  CHECK(code_of("nMn=10\n") == ConfigErrc::unknown_key);
  CHECK(code_of("nMin=ten\n") == ConfigErrc::bad_value);
  CHECK(code_of("weightKernel=gauss\n") == ConfigErrc::bad_value);
  CHECK(code_of("just words\n") == ConfigErrc::malformed_line);
}

TEST_CASE("config errors are usage errors") {
  try {
    parse_config("expand=0.5");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::usage);
  }
}

TEST_CASE("config text round-trips") {
  Config c = parse_config(
      "# comment\n gridStep = 0.12 \nsmoothing=gcv\nweightKernel=wendland-C4\n"
      "alpha=0.7\nnMin=300\nnMax=900 # trailing\n");
  CHECK(c.gridStep == 0.12);
  CHECK(c.gcv);
  CHECK(c.weightKernel == WeightKernel::wendland_c4);
  const Config back = parse_config(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(c.to_text().find("gridStep=0.12\n") != std::string::npos);
  CHECK(c.to_text().find("denoiseThreshold=0.15\n") != std::string::npos);
  CHECK(Config::keys().size() == 19);
}

TEST_CASE("xyz loading") {
  TempDir dir;
  write_file(dir / "a.xyz", "0 0 0\n1 0 0\n# note\n\n0 1 0\n");
  const auto cloud = load_point_cloud(dir / "a.xyz", CloudFormat::xyz);
  REQUIRE(cloud.size() == 3);
  CHECK_FALSE(cloud.has_normals());
  CHECK(cloud.points[1] == Vec3(1, 0, 0));

  write_file(dir / "nan.xyz", "0 0 0\nnan 1 2\n");
  CHECK_THROWS_AS(load_point_cloud(dir / "nan.xyz", CloudFormat::xyz), DataError);
  write_file(dir / "empty.xyz", "# nothing\n");
  CHECK_THROWS_AS(load_point_cloud(dir / "empty.xyz", CloudFormat::xyz), DataError);
  write_file(dir / "bad.xyz", "0 0 0\n1 2\n");
  try {
    load_point_cloud(dir / "bad.xyz", CloudFormat::xyz);
    FAIL("accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_point_cloud(dir / "missing.xyz", CloudFormat::xyz), DataError);
}

TEST_CASE("ply with normals") {
  TempDir dir;
  write_file(dir / "n.ply",
             "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\n"
             "property float x\nproperty float y\nproperty float z\n"
             "property float nx\nproperty float ny\nproperty float nz\n"
             "end_header\n0 0 0 0 0 1\n1 2 3 0 2 0\n");
  const auto cloud = load_point_cloud(dir / "n.ply", CloudFormat::ply_ascii);
  REQUIRE(cloud.size() == 2);
  REQUIRE(cloud.has_normals());
  CHECK(cloud.normals[1] == Vec3(0, 1, 0));
  CHECK_NOTHROW(cloud.validate());

  write_file(dir / "bin.ply",
             "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n");
  CHECK_THROWS_AS(load_point_cloud(dir / "bin.ply", CloudFormat::ply_ascii), DataError);
}

TEST_CASE("point clouds round-trip in both formats") {
  TempDir dir;
  Rng rng(5);
  PointCloud cloud;
  for (int i = 0; i < 50; ++i) {
    cloud.points.push_back(rng.uniform_in_box(Vec3::Constant(-100), Vec3::Constant(100)));
    cloud.normals.push_back(rng.unit_vector());
  }
  for (const auto* name : {"c.xyz", "c.ply"}) {
    const auto path = dir / name;
    save_point_cloud(cloud, path, cloud_format_for(path));
    const auto back = load_point_cloud(path, cloud_format_for(path));
    REQUIRE(back.size() == cloud.size());
    REQUIRE(back.has_normals());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      CHECK((back.points[i] - cloud.points[i]).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK((back.normals[i] - cloud.normals[i]).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("single triangle obj") {
  TempDir dir;
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.triangles = {{{0, 1, 2}}};
  save_mesh(m, dir / "t.obj", MeshFormat::obj);
  const auto text = read_file(dir / "t.obj");
  CHECK(count_lines_starting(text, "v ") == 3);
  CHECK(count_lines_starting(text, "f ") == 1);
  CHECK(text.find("f 1 2 3") != std::string::npos);
}

TEST_CASE("meshes round-trip with scalars") {
  TempDir dir;
  auto m = tetra_mesh();
  m.vertexScalars["curvature"] = {0.5, -1.0, 2.25, 3.0};
  save_mesh(m, dir / "m.ply", MeshFormat::ply_ascii);
  const auto text = read_file(dir / "m.ply");
  CHECK(text.find("property float curvature") != std::string::npos);
  const auto back = load_mesh(dir / "m.ply", MeshFormat::ply_ascii);
  CHECK(back.triangles == m.triangles);
  REQUIRE(back.vertices.size() == m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    CHECK((back.vertices[i] - m.vertices[i]).norm() <= 1e-6);
  }
  REQUIRE(back.vertexScalars.count("curvature") == 1);
  CHECK(back.vertexScalars.at("curvature")[2] == doctest::Approx(2.25));

  save_mesh(m, dir / "m.obj", MeshFormat::obj);
  const auto obj = load_mesh(dir / "m.obj", MeshFormat::obj);
  CHECK(obj.triangles == m.triangles);
  CHECK(obj.vertices.size() == 4);
}

TEST_CASE("empty mesh writes a valid file") {
  TempDir dir;
  const TriangleMesh empty;
  for (const auto* name : {"e.obj", "e.ply"}) {
    const auto path = dir / name;
    save_mesh(empty, path, mesh_format_for(path));
    const auto back = load_mesh(path, mesh_format_for(path));
    CHECK(back.vertices.empty());
    CHECK(back.triangles.empty());
  }
}

TEST_CASE("unwritable path and unknown extensions") {
  CHECK_THROWS_AS(save_mesh(tetra_mesh(), "/nonexistent-dir/x.obj", MeshFormat::obj),
                  DataError);
  CHECK_THROWS_AS(mesh_format_for("mesh.stl"), UsageError);
  CHECK_THROWS_AS(cloud_format_for("cloud.las"), UsageError);
}

TEST_CASE("type invariants") {
  PointCloud c;
  c.points = {{0, 0, 0}, {1, 1, 1}};
  c.normals = {{0, 0, 1}, {0, 0.6, 0.8}};
  CHECK_NOTHROW(c.validate());
  c.normals[1] = {0, 0, 2};
  CHECK_THROWS_AS(c.validate(), DataError);
  c.normals.pop_back();
  CHECK_THROWS_AS(c.validate(), DataError);

  TriangleMesh m = tetra_mesh();
  CHECK_NOTHROW(m.validate());
  m.triangles.push_back({{0, 0, 1}});
  CHECK_THROWS_AS(m.validate(), DataError);
  m.triangles.back() = {{0, 1, 4}};
  CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_CASE("seeded random source is reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
  const Vec3 u = a.unit_vector();
  CHECK(u.norm() == doctest::Approx(1.0));
}

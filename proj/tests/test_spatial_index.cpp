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

#include <algorithm>
#include <chrono>

#include "leafrecon/spatial_index.hpp"
#include "oracles.hpp"

using namespace leafrecon;

namespace {

std::vector<Vec3> random_cube(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = rng.uniform_in_box(Vec3::Zero(), Vec3::Ones());
  return pts;
}

std::vector<std::size_t> ids(const std::vector<Neighbor>& nb) {
  std::vector<std::size_t> out;
  for (const auto& n : nb) out.push_back(n.id);
  return out;
}

double mean_knn_seconds(const SpatialIndex& index, std::size_t queries, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> qs(queries);
  for (auto& q : qs) q = rng.uniform_in_box(Vec3::Zero(), Vec3::Ones());
  std::size_t sink = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& q : qs) sink += index.knn(q, 10).front().id;
  const auto t1 = std::chrono::steady_clock::now();
  CHECK(sink < queries * index.size());
  return std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(queries);
}

}  // namespace

TEST_CASE("singleton tree") {
  const std::vector<Vec3> one{{1, 2, 3}};
  const SpatialIndex index(one);
  CHECK(index.depth() == 0);
  const auto nb = index.knn({0, 0, 0}, 1);
  REQUIRE(nb.size() == 1);
  CHECK(nb[0].id == 0);
  CHECK(nb[0].distance == doctest::Approx(std::sqrt(14.0)));
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(SpatialIndex(std::vector<Vec3>{}), DataError);
  CHECK_THROWS_AS(SpatialIndex(std::vector<Vec3>{{0, 0, NAN}}), DataError);
  const SpatialIndex index(random_cube(20, 1));
  CHECK_THROWS_AS(index.knn({0, 0, 0}, 0), UsageError);
  CHECK_THROWS_AS(index.knn({0, 0, 0}, 21), UsageError);
  CHECK_THROWS_AS(index.radius_search({0, 0, 0}, -1.0), UsageError);
}

TEST_CASE("knn edge cases") {
  const auto pts = random_cube(200, 2);
  const SpatialIndex index(pts);
  const auto self = index.knn(pts[17], 1);
  CHECK(self[0].id == 17);
  CHECK(self[0].distance == 0.0);

  const auto all = index.knn({0.5, 0.5, 0.5}, pts.size());
  CHECK(ids(all) == test::brute_knn(pts, {0.5, 0.5, 0.5}, pts.size()));
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].distance <= all[i].distance);
}

TEST_CASE("duplicates are all retrievable and ties go to the lower id") {
  std::vector<Vec3> pts(40, Vec3(0.25, 0.5, 0.75));
  pts.push_back({0, 0, 0});
  const SpatialIndex index(pts, 4);
  const auto nb = index.knn({0.25, 0.5, 0.75}, 40);
  for (std::size_t i = 0; i < 40; ++i) CHECK(nb[i].id == i);
  CHECK(index.radius_search({0.25, 0.5, 0.75}, 0.0).size() == 40);
  CHECK(index.nearest({0.25, 0.5, 0.75}).id == 0);
}

TEST_CASE("radius edge cases") {
  const auto pts = random_cube(300, 3);
  const SpatialIndex index(pts);
  CHECK(index.radius_search(pts[5], 0.0) == std::vector<std::size_t>{5});
  CHECK(index.radius_search({0.5, 0.5, 0.5}, 10.0).size() == pts.size());
  // Closed ball: a point exactly at distance r is included.
  const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const SpatialIndex lineIndex(line);
  CHECK(lineIndex.radius_search({0, 0, 0}, 1.0) == std::vector<std::size_t>{0, 1});
  CHECK(lineIndex.count_within({0, 0, 0}, 1.0) == 2);
  CHECK(lineIndex.any_within({1, 3, 0}, 3.0));
  CHECK_FALSE(lineIndex.any_within({1, 3, 0}, 2.9));
}

TEST_CASE("queries agree with a linear scan") {
  const auto pts = random_cube(10000, 4);
  const SpatialIndex index(pts);
  Rng rng(9);
  std::size_t mismatches = 0;
  for (int q = 0; q < 1000; ++q) {
    const Vec3 x = rng.uniform_in_box(Vec3::Constant(-0.1), Vec3::Constant(1.1));
    if (ids(index.knn(x, 7)) != test::brute_knn(pts, x, 7)) ++mismatches;
    const double r = q % 2 ? 0.3 : 0.05;
    if (index.radius_search(x, r) != test::brute_radius(pts, x, r)) ++mismatches;
    if (index.count_within(x, r) != test::brute_radius(pts, x, r).size()) ++mismatches;
    const double d = test::brute_min_distance(pts, x);
    if (index.nearest(x).distance != d) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("large build matches brute force") {
  const auto pts = random_cube(100000, 5);
  const SpatialIndex index(pts);
  CHECK(index.size() == pts.size());
  Rng rng(11);
  for (int q = 0; q < 50; ++q) {
    const Vec3 x = rng.uniform_in_box(Vec3::Zero(), Vec3::Ones());
    CHECK(ids(index.knn(x, 12)) == test::brute_knn(pts, x, 12));
  }
}

TEST_CASE("knn time grows sub-linearly") {
  const SpatialIndex small(random_cube(10000, 6));
  const SpatialIndex large(random_cube(1000000, 7));
  // Warm both trees before timing.
  mean_knn_seconds(small, 2000, 1);
  mean_knn_seconds(large, 2000, 1);
  const double ts = mean_knn_seconds(small, 20000, 2);
  const double tl = mean_knn_seconds(large, 20000, 3);
  MESSAGE("mean knn: " << ts * 1e6 << " us at 1e4, " << tl * 1e6 << " us at 1e6");
  CHECK(tl <= 20.0 * ts);
}

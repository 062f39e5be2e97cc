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

#include "leafrecon/partition.hpp"
#include "leafrecon/pipeline.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace leafrecon;

namespace {

std::vector<Vec3> uniform_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = rng.uniform_in_box(Vec3::Zero(), Vec3::Ones());
  return pts;
}

/// Thin layers in z with a dense blob near one corner.
std::vector<Vec3> layered_with_cluster(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 3 == 0) {
      pts.push_back(Vec3(0.8, 0.8, 0.5) + 0.05 * Vec3(rng.normal(), rng.normal(), rng.normal()));
    } else {
      pts.push_back({rng.uniform(), rng.uniform(), 0.25 * static_cast<double>(rng.index(4))});
    }
  }
  return pts;
}

/// Straightforward cube-list version of the split/delete/grow/expand rules,
/// with every count done by a linear scan.
struct OracleSphere {
  Vec3 center;
  double radius;
  std::vector<std::size_t> members;
};

std::vector<OracleSphere> oracle_partition(const std::vector<Vec3>& pts, std::size_t nMin,
                                           std::size_t nMax, double expand) {
  struct Cube {
    Vec3 center;
    double side;
    std::size_t count;
  };
  const double f = std::sqrt(3.0) / 2.0 * (1.0 + 1e-9);
  auto count = [&](const Vec3& c, double r) { return test::brute_radius(pts, c, r).size(); };
  Vec3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double side0 = (hi - lo).maxCoeff();
  std::vector<Cube> cubes{{0.5 * (lo + hi), side0, count(0.5 * (lo + hi), f * side0)}};
  std::vector<bool> alive{true};
  while (true) {
    std::size_t best = cubes.size();
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      if (alive[i] && (best == cubes.size() || cubes[i].count > cubes[best].count)) best = i;
    }
    if (cubes[best].count <= nMax) break;
    alive[best] = false;
    const Cube parent = cubes[best];
    for (int octant = 0; octant < 8; ++octant) {
      const double q = parent.side / 4.0;
      const Vec3 c = parent.center + Vec3((octant & 1) ? q : -q, (octant & 2) ? q : -q,
                                          (octant & 4) ? q : -q);
      cubes.push_back({c, parent.side / 2.0, count(c, f * parent.side / 2.0)});
      alive.push_back(true);
    }
  }
  const std::size_t need = std::min(nMin, pts.size());
  std::vector<OracleSphere> out;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (!alive[i] || cubes[i].count == 0) continue;
    double r = f * cubes[i].side;
    if (cubes[i].count < need) {
      std::vector<double> d;
      for (const auto& p : pts) d.push_back((p - cubes[i].center).norm());
      std::nth_element(d.begin(), d.begin() + static_cast<long>(need - 1), d.end());
      r = d[need - 1];
    }
    r *= expand;
    out.push_back({cubes[i].center, r, test::brute_radius(pts, cubes[i].center, r)});
  }
  return out;
}

void check_invariants(const std::vector<Vec3>& pts, const Partition& p, int nMin, int nMax) {
  CHECK(p.stats.maxCountAtExit <= static_cast<std::size_t>(nMax));
  const std::size_t need = std::min<std::size_t>(static_cast<std::size_t>(nMin), pts.size());
  for (const auto& s : p.subdomains()) CHECK(s.memberIds.size() >= need);
  std::vector<char> covered(pts.size(), 0);
  for (const auto& s : p.subdomains()) {
    for (auto id : s.memberIds) covered[id] = 1;
  }
  CHECK(std::count(covered.begin(), covered.end(), 0) == 0);
  for (const auto& x : pts) CHECK_FALSE(p.shepard_weights(x).empty());
}

}  // namespace

TEST_CASE("wendland values") {
  CHECK(wendland(0.0, WeightKernel::wendland_c2) == 1.0);
  CHECK(wendland(1.0, WeightKernel::wendland_c2) == 0.0);
  CHECK(wendland(0.5, WeightKernel::wendland_c2) == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(wendland(2.0, WeightKernel::wendland_c2) == 0.0);
  CHECK(wendland(0.0, WeightKernel::wendland_c4) == 3.0);
  CHECK(wendland(0.5, WeightKernel::wendland_c4) ==
        doctest::Approx(std::pow(0.5, 6) * (35 * 0.25 + 9 + 3)));
  CHECK_THROWS_AS(wendland(-0.1, WeightKernel::wendland_c2), UsageError);
}

TEST_CASE("weight derivatives against finite differences") {
  const Vec3 c(0.1, -0.2, 0.3);
  Rng rng(2);
  for (auto kind : {WeightKernel::wendland_c2, WeightKernel::wendland_c4}) {
    for (int t = 0; t < 20; ++t) {
      const Vec3 x = c + 0.8 * rng.unit_vector() * rng.uniform(0.05, 1.0);
      const auto d = wendland_derivatives(x, c, 0.8, kind);
      CHECK(d.value == doctest::Approx(wendland((x - c).norm() / 0.8, kind)));
      const double h = 1e-5;
      for (int k = 0; k < 3; ++k) {
        const Vec3 e = Vec3::Unit(k) * h;
        const auto p = wendland_derivatives(x + e, c, 0.8, kind);
        const auto m = wendland_derivatives(x - e, c, 0.8, kind);
        CHECK(d.gradient[k] == doctest::Approx((p.value - m.value) / (2 * h)).epsilon(1e-6));
        const Vec3 col = (p.gradient - m.gradient) / (2 * h);
        CHECK((d.hessian.col(k) - col).norm() <= 1e-5 * (1.0 + col.norm()));
      }
    }
  }
}

TEST_CASE("shepard weights") {
  Subdomain a{{0, 0, 0}, 1.0, {}, 0.0}, b{{1, 0, 0}, 1.0, {}, 0.0};
  const Partition one({a}, WeightKernel::wendland_c2, 1.0);
  const auto w1 = one.shepard_weights({0.3, 0.1, 0});
  REQUIRE(w1.size() == 1);
  CHECK(w1[0].second == 1.0);
  CHECK(one.shepard_weights({3, 0, 0}).empty());

  const Partition two({a, b}, WeightKernel::wendland_c2, 1.0);
  const auto w2 = two.shepard_weights({0.5, 0, 0});
  REQUIRE(w2.size() == 2);
  CHECK(w2[0].second == doctest::Approx(0.5));
  CHECK(w2[1].second == doctest::Approx(0.5));

  Rng rng(3);
  std::vector<Subdomain> ten;
  for (int i = 0; i < 10; ++i) {
    ten.push_back({rng.uniform_in_box(Vec3::Zero(), Vec3::Ones()), rng.uniform(0.4, 0.9), {}, 0.0});
  }
  const Partition p(ten, WeightKernel::wendland_c4, 1.0);
  int tested = 0;
  for (int t = 0; t < 500; ++t) {
    const auto w = p.shepard_weights(rng.uniform_in_box(Vec3::Zero(), Vec3::Ones()));
    if (w.empty()) continue;
    ++tested;
    double sum = 0.0;
    for (const auto& [i, v] : w) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  CHECK(tested > 400);
}

TEST_CASE("small inputs give one subdomain") {
  const auto pts = uniform_cloud(100, 4);
  const auto p = build_partition(pts, 10, 100, 1.1);
  REQUIRE(p.size() == 1);
  CHECK(p.subdomain(0).memberIds.size() == 100);
  CHECK(p.stats.splits == 0);
  const auto box = bounding_box(pts);
  CHECK(p.subdomain(0).radius ==
        doctest::Approx(1.1 * std::sqrt(3.0) / 2.0 * box.extent().maxCoeff()).epsilon(1e-8));
  CHECK_THROWS_AS(build_partition(std::vector<Vec3>{}, 1, 2, 1.1), DataError);
  CHECK_THROWS_AS(build_partition(pts, 20, 10, 1.1), UsageError);
}

TEST_CASE("fewer sites than nMin: every subdomain holds them all") {
  const auto pts = uniform_cloud(50, 5);
  const auto p = build_partition(pts, 80, 80, 1.0);
  for (const auto& s : p.subdomains()) CHECK(s.memberIds.size() == 50);
}

TEST_CASE("capsicum sizes on a clustered cloud") {
  const auto pts = layered_with_cluster(30000, 6);
  const auto p = build_partition(pts, 2000, 5000, 1.1);
  check_invariants(pts, p, 2000, 5000);
  CHECK(p.size() > 1);
}

TEST_CASE("matches a direct cube-list implementation") {
  const auto pts = layered_with_cluster(3000, 7);
  const auto p = build_partition(pts, 40, 150, 1.2);
  const auto oracle = oracle_partition(pts, 40, 150, 1.2);
  REQUIRE(p.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    CHECK((p.subdomain(i).center - oracle[i].center).norm() <= 1e-12);
    CHECK(p.subdomain(i).radius == doctest::Approx(oracle[i].radius).epsilon(1e-12));
    std::vector<std::size_t> ids(p.subdomain(i).memberIds.begin(), p.subdomain(i).memberIds.end());
    CHECK(ids == oracle[i].members);
  }
  // Splits concentrate where the cluster is.
  std::size_t inCluster = 0;
  for (const auto& s : p.subdomains()) {
    inCluster += (s.center - Vec3(0.8, 0.8, 0.5)).norm() < 0.25;
  }
  CHECK(2 * inCluster > p.size());
  check_invariants(pts, p, 40, 150);
}

TEST_CASE("members match a radius query") {
  const auto pts = uniform_cloud(5000, 8);
  const auto p = build_partition(pts, 100, 300, 1.1);
  for (const auto& s : p.subdomains()) {
    const auto ids = test::brute_radius(pts, s.center, s.radius);
    CHECK(std::vector<std::size_t>(s.memberIds.begin(), s.memberIds.end()) == ids);
  }
}

TEST_CASE("sites on cube corners stay covered") {
  // Both sites sit on corners of the bounding cube and of every later split.
  std::vector<Vec3> pts{{0, 0, 0}, {1, 1, 1}, {0.5, 0.5, 0.5}};
  const auto p = build_partition(pts, 1, 1, 1.0);
  std::vector<char> covered(pts.size(), 0);
  for (const auto& s : p.subdomains()) {
    for (auto id : s.memberIds) covered[id] = 1;
  }
  CHECK(std::count(covered.begin(), covered.end(), 0) == 0);
}

TEST_CASE("coincident sites stop splitting") {
  std::vector<Vec3> pts(500, Vec3(1, 1, 1));
  pts.push_back({0, 0, 0});
  const auto p = build_partition(pts, 10, 100, 1.0);
  CHECK(p.stats.unsplittable >= 1);
  std::vector<char> covered(pts.size(), 0);
  for (const auto& s : p.subdomains()) {
    for (auto id : s.memberIds) covered[id] = 1;
  }
  CHECK(std::count(covered.begin(), covered.end(), 0) == 0);
}

TEST_CASE("partition dump") {
  test::TempDir dir;
  const auto p = build_partition(uniform_cloud(2000, 9), 100, 400, 1.1);
  save_partition(p, dir / "p.txt");
  const auto text = test::read_file(dir / "p.txt");
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == p.size());
}

TEST_CASE("build time scales at most like N^1.5") {
  std::vector<double> n, t;
  for (std::size_t size : {10000u, 100000u, 1000000u}) {
    const auto pts = uniform_cloud(size, 10);
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = build_partition(pts, 500, 1500, 1.1);
    const auto t1 = std::chrono::steady_clock::now();
    n.push_back(static_cast<double>(size));
    t.push_back(std::chrono::duration<double>(t1 - t0).count());
    CHECK(p.size() > 0);
  }
  const auto slope = power_law_exponent(n, t);
  REQUIRE(slope.has_value());
  MESSAGE("build exponent " << *slope);
  CHECK(*slope <= 1.5);
}

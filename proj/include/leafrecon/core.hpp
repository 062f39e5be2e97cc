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

#include <array>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace leafrecon {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// ---------------------------------------------------------------------------
// Errors. The kind maps directly onto the CLI exit code.

enum class ErrorKind { usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

// ---------------------------------------------------------------------------
// Point clouds and constraint sets.

/// Scan points with optional unit normals.
///
/// `normals` is either empty or parallel to `points`. Entries flagged in
/// `normalMissing` carry a zero vector: they came from a degenerate
/// neighbourhood or a cell whose averaged normal cancelled.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> normalMissing;

  std::size_t size() const noexcept { return points.size(); }
  bool has_normals() const noexcept { return !normals.empty(); }
  bool normal_valid(std::size_t i) const {
    return has_normals() && (normalMissing.empty() || normalMissing[i] == 0);
  }

  /// Throws DataError on a non-finite coordinate, a length mismatch or a
  /// non-unit normal.
  void validate() const;
};

/// On-surface (value 0) and off-surface (value +L / -L) interpolation
/// constraints. Sites are stored on-surface first, then the +L offsets, then
/// the -L offsets.
struct AugmentedDataset {
  std::vector<Vec3> sites;
  std::vector<double> values;
  std::vector<std::uint32_t> parent;  // on-surface point each site came from
  std::size_t onSurface = 0;
  std::size_t offSurface = 0;
  std::size_t discarded = 0;  // offsets rejected by the interpenetration guard
  double offset = 0.0;

  std::size_t size() const noexcept { return sites.size(); }
};

/// Triangle mesh with optional named per-vertex scalars.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::map<std::string, std::vector<double>> vertexScalars;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Small helpers shared across modules.

struct BoundingBox {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool empty() const { return (min.array() > max.array()).any(); }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
};

BoundingBox bounding_box(std::span<const Vec3> points);

/// Seedable generator used by the synthetic data generators and the tests.
/// Sequences are reproducible for a given seed on a given standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  Vec3 unit_vector();
  Vec3 uniform_in_box(const Vec3& lo, const Vec3& hi);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Worker count used when a caller passes 0.
unsigned default_workers();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown by any task is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn);

}  // namespace leafrecon

#include "leafrecon/detail/parallel.hpp"

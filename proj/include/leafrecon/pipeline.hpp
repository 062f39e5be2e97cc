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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "leafrecon/config.hpp"
#include "leafrecon/core.hpp"
#include "leafrecon/interpolant.hpp"
#include "leafrecon/normals.hpp"

namespace leafrecon {

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineReport {
  Config config;
  std::vector<StageTime> stages;
  std::size_t inputPoints = 0;
  std::size_t removedOutliers = 0;
  std::size_t cleanedPoints = 0;
  std::size_t downsampledPoints = 0;
  std::size_t components = 0;
  std::size_t constraints = 0;
  std::size_t discardedOffsets = 0;
  std::size_t subdomains = 0;
  std::size_t meshVertices = 0;
  std::size_t meshTriangles = 0;
  std::size_t curvatureFailures = 0;
  double rhoMin = 0.0;
  double rhoMedian = 0.0;
  double rhoMax = 0.0;

  double seconds(const std::string& stage) const;

  /// Readable summary followed by a `key=value` block (between "[report]"
  /// and "[end]") that parse_report_block() reads back.
  std::string to_text() const;
};

std::vector<std::pair<std::string, std::string>> parse_report_block(const std::string& text);

struct PipelineOptions {
  unsigned workers = 0;
  bool clean = true;        // outlier removal
  bool curvature = true;    // attach "mean_curvature"
};

struct PipelineResult {
  PipelineReport report;
  OrientationResult orientation;
  AugmentedDataset data;
  ImplicitField field;
  TriangleMesh mesh;
};

/// clean -> downsample -> orient normals -> offsets -> partition -> fit ->
/// sample -> extract -> curvature. Errors are re-thrown with the stage name
/// prefixed and their kind preserved.
PipelineResult reconstruct(const PointCloud& cloud, const Config& config,
                           const PipelineOptions& options = {});

/// Loads `input`, reconstructs, writes the mesh to `output` (format from
/// the extension) and returns the report.
PipelineReport run_pipeline(const Config& config, const std::filesystem::path& input,
                            const std::filesystem::path& output,
                            const PipelineOptions& options = {});

struct BenchRow {
  std::size_t n = 0;
  std::size_t subdomains = 0;
  double meanSites = 0.0;
  double buildSeconds = 0.0;
  double fitSeconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::optional<double> buildExponent;  // unset for fewer than two sizes
  std::optional<double> fitExponent;

  std::string to_text() const;
};

/// Slope of the least-squares line through (log x, log y).
std::optional<double> power_law_exponent(const std::vector<double>& x,
                                         const std::vector<double>& y);

/// Times partition build and fit on uniform random values at uniform random
/// sites. The sites fill a slab [0, N/N0] x [0,1]^2 (N0 = sizes[0]) so that
/// density, and hence the number of sites per subdomain, does not change with
/// N. Uses nMin, nMax, expand, splineOrder and smoothing from `config`.
BenchResult bench_scaling(const std::vector<std::size_t>& sizes, const Config& config,
                          std::uint64_t seed = 1, unsigned workers = 0);

}  // namespace leafrecon

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

#include "leafrecon/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "leafrecon/io.hpp"
#include "leafrecon/partition.hpp"
#include "leafrecon/preprocess.hpp"
#include "leafrecon/surface_extract.hpp"

namespace leafrecon {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

[[noreturn]] void rethrow_tagged(const std::string& stage, const Error& e) {
  const std::string what = stage + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::usage: throw UsageError(what);
    case ErrorKind::numerical: throw NumericalError(what);
    default: throw DataError(what);
  }
}

/// Runs fn, records its wall time under `stage` and tags any error with it.
template <typename Fn>
auto timed(PipelineReport& report, const std::string& stage, Fn&& fn) {
  const auto start = Clock::now();
  spdlog::info("{} ...", stage);
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      report.stages.push_back({stage, since(start)});
    } else {
      auto result = fn();
      report.stages.push_back({stage, since(start)});
      return result;
    }
  } catch (const Error& e) {
    rethrow_tagged(stage, e);
  }
}

}  // namespace

double PipelineReport::seconds(const std::string& stage) const {
  for (const auto& s : stages) {
    if (s.stage == stage) return s.seconds;
  }
  return 0.0;
}

std::string PipelineReport::to_text() const {
  std::string out;
  out += fmt::format("input points       {}\n", inputPoints);
  out += fmt::format("outliers removed   {}\n", removedOutliers);
  out += fmt::format("after cleaning     {}\n", cleanedPoints);
  out += fmt::format("after downsampling {}\n", downsampledPoints);
  out += fmt::format("components         {}\n", components);
  out += fmt::format("constraints        {} ({} offsets discarded)\n", constraints,
                     discardedOffsets);
  out += fmt::format("subdomains         {}\n", subdomains);
  out += fmt::format("smoothing          min {:.4g}  median {:.4g}  max {:.4g}\n", rhoMin,
                     rhoMedian, rhoMax);
  out += fmt::format("mesh               {} vertices, {} triangles\n", meshVertices,
                     meshTriangles);
  double total = 0.0;
  for (const auto& s : stages) {
    out += fmt::format("  {:<12} {:10.3f} s\n", s.stage, s.seconds);
    total += s.seconds;
  }
  out += fmt::format("  {:<12} {:10.3f} s\n", "total", total);

  out += "[report]\n";
  out += fmt::format("input_points={}\nremoved_outliers={}\ncleaned_points={}\n", inputPoints,
                     removedOutliers, cleanedPoints);
  out += fmt::format("downsampled_points={}\ncomponents={}\nconstraints={}\n", downsampledPoints,
                     components, constraints);
  out += fmt::format("discarded_offsets={}\nsubdomains={}\n", discardedOffsets, subdomains);
  out += fmt::format("rho_min={:.6g}\nrho_median={:.6g}\nrho_max={:.6g}\n", rhoMin, rhoMedian,
                     rhoMax);
  out += fmt::format("mesh_vertices={}\nmesh_triangles={}\ncurvature_failures={}\n", meshVertices,
                     meshTriangles, curvatureFailures);
  for (const auto& s : stages) out += fmt::format("time_{}={:.6f}\n", s.stage, s.seconds);
  std::istringstream params(config.to_text());
  for (std::string line; std::getline(params, line);) {
    if (!line.empty()) out += "config." + line + "\n";
  }
  out += "[end]\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_report_block(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  bool inside = false;
  for (std::string line; std::getline(in, line);) {
    if (line == "[report]") {
      inside = true;
    } else if (line == "[end]") {
      break;
    } else if (inside) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
  }
  return out;
}

PipelineResult reconstruct(const PointCloud& input, const Config& config,
                           const PipelineOptions& options) {
  config.validate();
  PipelineResult result;
  PipelineReport& report = result.report;
  report.config = config;
  report.inputPoints = input.size();
  const unsigned workers = options.workers;

  PointCloud cloud = timed(report, "clean", [&] {
    input.validate();
    if (input.size() == 0) throw DataError("empty point cloud");
    if (!options.clean || input.size() < 2) return input;
    int k = config.denoiseNbrs;
    if (static_cast<std::size_t>(k) >= input.size()) {
      k = static_cast<int>(input.size()) - 1;
      spdlog::warn("denoiseNbrs reduced to {} for a cloud of {} points", k, input.size());
    }
    auto [kept, outliers] = remove_outliers(input, k, config.denoiseThreshold, workers);
    report.removedOutliers = outliers.removedIds.size();
    return kept;
  });
  report.cleanedPoints = cloud.size();

  cloud = timed(report, "downsample", [&] { return grid_downsample(cloud, config.gridStep); });
  report.downsampledPoints = cloud.size();

  result.orientation = timed(report, "normals", [&] {
    return orient_normals(cloud, config.coarseGridStep, config.graphNbrs, config.pcaNbrs, workers);
  });
  report.components = result.orientation.componentCount;

  result.data = timed(report, "augment", [&] {
    return augment_offsets(result.orientation.cloud, config.offset_length());
  });
  report.constraints = result.data.size();
  report.discardedOffsets = result.data.discarded;

  Partition partition = timed(report, "partition", [&] {
    return build_partition(result.data.sites, config.nMin, config.nMax, config.expand,
                           config.weightKernel);
  });
  report.subdomains = partition.size();

  result.field = timed(report, "fit", [&] {
    FitOptions fit;
    fit.kernel = PhsKernel(config.splineOrder, config.dimension);
    fit.gcv = config.gcv;
    fit.smoothing = config.smoothing;
    fit.gcvLow = config.gcvLow;
    fit.gcvHigh = config.gcvHigh;
    fit.workers = workers;
    return fit_field(result.data, std::move(partition), fit, config.alpha_radius());
  });
  std::vector<double> rho;
  for (const auto& s : result.field.partition().subdomains()) rho.push_back(s.smoothing);
  if (!rho.empty()) {
    std::sort(rho.begin(), rho.end());
    report.rhoMin = rho.front();
    report.rhoMax = rho.back();
    const std::size_t mid = rho.size() / 2;
    report.rhoMedian = rho.size() % 2 ? rho[mid] : 0.5 * (rho[mid - 1] + rho[mid]);
  }

  const SampleGrid grid = timed(report, "sample", [&] {
    return sample_grid(result.field, config.isoGridStep, config.nodeBudget, workers);
  });
  result.mesh = timed(report, "extract", [&] { return marching_tetrahedra(grid); });
  if (options.curvature) {
    report.curvatureFailures =
        timed(report, "curvature", [&] { return attach_curvature(result.mesh, result.field, workers); });
  }
  report.meshVertices = result.mesh.vertices.size();
  report.meshTriangles = result.mesh.triangles.size();
  return result;
}

PipelineReport run_pipeline(const Config& config, const std::filesystem::path& input,
                            const std::filesystem::path& output, const PipelineOptions& options) {
  PipelineReport loadTimes;
  const PointCloud cloud = timed(loadTimes, "load", [&] {
    return load_point_cloud(input, cloud_format_for(input));
  });
  PipelineResult result = reconstruct(cloud, config, options);
  timed(result.report, "write",
        [&] { save_mesh(result.mesh, output, mesh_format_for(output)); });
  result.report.stages.insert(result.report.stages.begin(), loadTimes.stages.front());
  return result.report;
}

// ---------------------------------------------------------------------------
// Benchmark

std::optional<double> power_law_exponent(const std::vector<double>& x,
                                         const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  // All sizes equal (up to rounding in the logs).
  if (!(den > 1e-12 * n * sxx)) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

std::string BenchResult::to_text() const {
  std::string out = fmt::format("{:>10} {:>10} {:>12} {:>12} {:>12}\n", "N", "subdomains",
                                "sites/sub", "build [s]", "fit [s]");
  for (const auto& r : rows) {
    out += fmt::format("{:>10} {:>10} {:>12.1f} {:>12.4f} {:>12.4f}\n", r.n, r.subdomains,
                       r.meanSites, r.buildSeconds, r.fitSeconds);
  }
  if (buildExponent) out += fmt::format("build exponent {:.3f}\n", *buildExponent);
  if (fitExponent) out += fmt::format("fit exponent   {:.3f}\n", *fitExponent);
  if (!fitExponent) out += "exponent undefined (need at least two sizes)\n";
  return out;
}

BenchResult bench_scaling(const std::vector<std::size_t>& sizes, const Config& config,
                          std::uint64_t seed, unsigned workers) {
  if (sizes.empty()) throw UsageError("bench: no sizes");
  if (!std::is_sorted(sizes.begin(), sizes.end()) || sizes.front() == 0) {
    throw UsageError("bench: sizes must be positive and ascending");
  }
  BenchResult result;
  const double n0 = static_cast<double>(sizes.front());
  for (const std::size_t n : sizes) {
    Rng rng(seed + n);
    AugmentedDataset data;
    // Fixed density (n0 per unit volume) in a 1 x 0.5 bar whose length grows
    // with N. The bar is never a cube, so the octree meets every size with
    // the same cross-section and the same empty cells around it.
    const double length = 2.0 * static_cast<double>(n) / n0;
    data.sites.reserve(n);
    data.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      data.sites.push_back(rng.uniform_in_box(Vec3::Zero(), Vec3(length, 1.0, 0.5)));
      data.values.push_back(rng.uniform(-1.0, 1.0));
    }
    data.onSurface = n;

    BenchRow row;
    row.n = n;
    auto start = Clock::now();
    Partition partition =
        build_partition(data.sites, config.nMin, config.nMax, config.expand, config.weightKernel);
    row.buildSeconds = since(start);
    row.subdomains = partition.size();
    double members = 0.0;
    for (const auto& s : partition.subdomains()) members += static_cast<double>(s.memberIds.size());
    row.meanSites = members / static_cast<double>(std::max<std::size_t>(partition.size(), 1));

    FitOptions fit;
    fit.kernel = PhsKernel(config.splineOrder, 3);
    fit.smoothing = config.smoothing;
    fit.workers = workers;
    start = Clock::now();
    const ImplicitField field = fit_field(data, std::move(partition), fit, 1.0);
    row.fitSeconds = since(start);
    spdlog::info("bench N={} subdomains={} build={:.3f}s fit={:.3f}s", n, row.subdomains,
                 row.buildSeconds, row.fitSeconds);
    result.rows.push_back(row);
  }
  std::vector<double> ns, build, fitTimes;
  for (const auto& r : result.rows) {
    ns.push_back(static_cast<double>(r.n));
    build.push_back(r.buildSeconds);
    fitTimes.push_back(r.fitSeconds);
  }
  result.buildExponent = power_law_exponent(ns, build);
  result.fitExponent = power_law_exponent(ns, fitTimes);
  return result;
}

}  // namespace leafrecon

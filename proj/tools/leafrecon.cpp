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

// leafrecon: reconstruct thin surfaces from point clouds.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "leafrecon/config.hpp"
#include "leafrecon/io.hpp"
#include "leafrecon/normals.hpp"
#include "leafrecon/partition.hpp"
#include "leafrecon/pipeline.hpp"
#include "leafrecon/preprocess.hpp"
#include "leafrecon/synthetic.hpp"

namespace lr = leafrecon;

namespace {

/// --config plus one --<key> flag per config key; flags win over the file.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key=value configuration file");
    for (const auto& key : lr::Config::keys()) {
      cmd->add_option("--" + key, overrides[key], "override config key " + key);
    }
  }

  lr::Config resolve() const {
    lr::Config config = file.empty() ? lr::Config{} : lr::load_config(file);
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) config.set(key, value);
    }
    config.validate();
    return config;
  }
};

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                         : comma - pos);
    try {
      const double v = std::stod(item);
      if (!(v >= 1.0)) throw std::invalid_argument(item);
      sizes.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw lr::UsageError("bad size '" + item + "' in --sizes");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return sizes;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw lr::DataError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("leafrecon"));
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

  CLI::App app{"Thin-surface reconstruction from point clouds"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  unsigned workers = 0;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");
  app.add_option("-j,--workers", workers, "worker threads (0: all cores)");

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "point cloud -> triangle mesh");
  std::string recInput, recOutput, recReport;
  bool noClean = false, noCurvature = false;
  ConfigFlags recConfig;
  rec->add_option("input", recInput, "point cloud (.xyz or .ply)")->required();
  rec->add_option("output", recOutput, "mesh (.obj or .ply)")->required();
  rec->add_option("--report", recReport, "write the report here instead of stdout");
  rec->add_flag("--no-clean", noClean, "skip outlier removal");
  rec->add_flag("--no-curvature", noCurvature, "skip the mean_curvature attribute");
  recConfig.attach(rec);

  // gen-sphere
  auto* sph = app.add_subcommand("gen-sphere", "noisy samples of a sphere");
  std::string sphOutput;
  std::size_t sphN = 100000;
  double sphRadius = 1.0, sphNoise = 0.005;
  std::uint64_t sphSeed = 1;
  sph->add_option("output", sphOutput, "point cloud (.xyz or .ply)")->required();
  sph->add_option("-n,--count", sphN, "number of points");
  sph->add_option("--radius", sphRadius, "sphere radius");
  sph->add_option("--noise", sphNoise, "standard deviation of the radial noise");
  sph->add_option("--seed", sphSeed, "random seed");

  // gen-curled-sheet
  auto* sheet = app.add_subcommand("gen-curled-sheet", "curled leaf-like sheet");
  std::string sheetOutput;
  std::size_t sheetN = 60000;
  std::uint64_t sheetSeed = 1;
  lr::CurledSheetOptions sheetOptions;
  sheet->add_option("output", sheetOutput, "point cloud (.xyz or .ply)")->required();
  sheet->add_option("-n,--count", sheetN, "number of points");
  sheet->add_option("--seed", sheetSeed, "random seed");
  sheet->add_option("--margin", sheetOptions.edgeMargin, "unsampled strip at each edge");
  sheet->add_option("--bump", sheetOptions.bump, "height field amplitude");

  // bench
  auto* bench = app.add_subcommand("bench", "fit-time scaling on random data");
  std::string benchSizes = "20000,80000,320000";
  std::uint64_t benchSeed = 1;
  std::string benchOutput;
  ConfigFlags benchConfig;
  bench->add_option("--sizes", benchSizes, "comma-separated ascending sizes");
  bench->add_option("--seed", benchSeed, "random seed");
  bench->add_option("-o,--output", benchOutput, "write the table here instead of stdout");
  benchConfig.attach(bench);

  // inspect
  auto* insp = app.add_subcommand("inspect", "partition and normal diagnostics");
  std::string inspInput, inspPartition, inspNormals;
  ConfigFlags inspConfig;
  insp->add_option("input", inspInput, "point cloud (.xyz or .ply)")->required();
  insp->add_option("--partition", inspPartition, "write 'cx cy cz r count' lines here");
  insp->add_option("--normals", inspNormals, "write oriented normals by component here");
  inspConfig.attach(insp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_level(verbose ? spdlog::level::debug
                            : (quiet ? spdlog::level::warn : spdlog::level::info));

  try {
    if (*rec) {
      const lr::Config config = recConfig.resolve();
      lr::PipelineOptions options;
      options.workers = workers;
      options.clean = !noClean;
      options.curvature = !noCurvature;
      const auto report = lr::run_pipeline(config, recInput, recOutput, options);
      write_text(recReport, report.to_text());
    } else if (*sph) {
      const auto cloud = lr::gen_sphere(sphN, sphRadius, sphNoise, sphSeed);
      lr::save_point_cloud(cloud, sphOutput, lr::cloud_format_for(sphOutput));
    } else if (*sheet) {
      const auto cloud = lr::gen_curled_sheet(sheetN, sheetSeed, sheetOptions);
      lr::save_point_cloud(cloud, sheetOutput, lr::cloud_format_for(sheetOutput));
    } else if (*bench) {
      lr::Config config = benchConfig.resolve();
      const auto result = lr::bench_scaling(parse_sizes(benchSizes), config, benchSeed, workers);
      write_text(benchOutput, result.to_text());
    } else if (*insp) {
      const lr::Config config = inspConfig.resolve();
      const auto input = lr::load_point_cloud(inspInput, lr::cloud_format_for(inspInput));
      const auto cloud = lr::grid_downsample(input, config.gridStep);
      const auto oriented = lr::orient_normals(cloud, config.coarseGridStep, config.graphNbrs,
                                               config.pcaNbrs, workers);
      const auto data = lr::augment_offsets(oriented.cloud, config.offset_length());
      const auto partition =
          lr::build_partition(data.sites, config.nMin, config.nMax, config.expand,
                              config.weightKernel);
      std::size_t smallest = SIZE_MAX, largest = 0;
      for (const auto& s : partition.subdomains()) {
        smallest = std::min(smallest, s.memberIds.size());
        largest = std::max(largest, s.memberIds.size());
      }
      std::cout << fmt::format(
          "points {}\ndownsampled {}\ncomponents {}\nconstraints {} ({} discarded)\n"
          "subdomains {} (sites per subdomain {}..{})\nsplits {}\ngrown {}\n",
          input.size(), cloud.size(), oriented.componentCount, data.size(), data.discarded,
          partition.size(), smallest, largest, partition.stats.splits, partition.stats.grown);
      if (!inspPartition.empty()) lr::save_partition(partition, inspPartition);
      if (!inspNormals.empty()) {
        lr::save_labelled_normals(oriented.cloud, oriented.labels, inspNormals);
      }
    }
  } catch (const lr::Error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
  return 0;
}

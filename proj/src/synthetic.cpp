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

#include "leafrecon/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace leafrecon {

PointCloud gen_sphere(std::size_t n, double radius, double noiseSigma, std::uint64_t seed) {
  if (n < 4) throw UsageError("gen_sphere: need n >= 4");
  if (!(radius > 0.0) || !(noiseSigma >= 0.0)) {
    throw UsageError("gen_sphere: need radius > 0 and noise >= 0");
  }
  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 u = rng.unit_vector();
    const double r = noiseSigma > 0.0 ? radius + rng.normal(0.0, noiseSigma) : radius;
    cloud.points.push_back(r * u);
  }
  return cloud;
}

Vec3 curl_transform(const Vec3& flat) {
  const double beta = std::numbers::pi * (flat.y() - 0.5);
  const double eta = std::cos(2.0 * beta) / 3.0 + 1.0 - flat.z();
  return {1.5 * flat.x(), eta * std::cos(beta), eta * std::sin(beta)};
}

double curled_sheet_height(double x, double y, const CurledSheetOptions& options) {
  const double h = std::numbers::pi / 2.0;
  return options.bump * std::cos(h * x) * std::cos(h * y);
}

PointCloud gen_curled_sheet(std::size_t n, std::uint64_t seed, const CurledSheetOptions& options) {
  if (n < 100) throw UsageError("gen_curled_sheet: need n >= 100");
  if (!(options.edgeMargin >= 0.0 && options.edgeMargin < 1.0)) {
    throw UsageError("gen_curled_sheet: edge margin must be in [0, 1)");
  }
  Rng rng(seed);
  const double ymax = 1.0 - options.edgeMargin;
  PointCloud cloud;
  cloud.points.reserve(n);
  while (cloud.points.size() < n) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-ymax, ymax);
    if (std::abs(y) >= 1.0) continue;  // open interval even with zero margin
    cloud.points.push_back(curl_transform({x, y, curled_sheet_height(x, y, options)}));
  }
  return cloud;
}

}  // namespace leafrecon

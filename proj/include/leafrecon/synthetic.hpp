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

#include "leafrecon/core.hpp"

namespace leafrecon {

/// n uniform points on the sphere of the given radius centred at the origin,
/// each moved radially by N(0, noiseSigma). Throws UsageError for n < 4.
PointCloud gen_sphere(std::size_t n, double radius, double noiseSigma, std::uint64_t seed);

struct CurledSheetOptions {
  /// Rows with |y| > 1 - edgeMargin are not sampled; this opens the gap
  /// between the two curled-up edges.
  double edgeMargin = 0.15;
  /// Amplitude of the height field bump * cos(pi x / 2) cos(pi y / 2).
  double bump = 0.05;
};

/// Flat-sheet coordinates (x, y, z) to the curled leaf:
///   beta = pi (y - 1/2), eta = cos(2 beta)/3 + 1 - z,
///   (3x/2, eta cos beta, eta sin beta).
Vec3 curl_transform(const Vec3& flat);

double curled_sheet_height(double x, double y, const CurledSheetOptions& options);

/// x uniform in [-1, 1], y uniform in (-1 + margin, 1 - margin), z from the
/// height field, then curled. Throws UsageError for n < 100.
PointCloud gen_curled_sheet(std::size_t n, std::uint64_t seed,
                            const CurledSheetOptions& options = {});

}  // namespace leafrecon

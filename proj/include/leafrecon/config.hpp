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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leafrecon/core.hpp"

namespace leafrecon {

enum class WeightKernel { wendland_c2, wendland_c4 };

enum class ConfigErrc {
  malformed_line,
  unknown_key,
  bad_value,
  invalid_count,
  nonpositive_length,
  nmin_exceeds_nmax,
  expand_below_one,
  negative_smoothing,
  invalid_gcv_bracket,
  order_not_positive,      // 2m - d <= 0
  unsupported_dimension,
  unsupported_order,
};

const char* to_string(ConfigErrc code);

class ConfigError : public UsageError {
 public:
  ConfigError(ConfigErrc code, const std::string& what)
      : UsageError(std::string(to_string(code)) + ": " + what), code_(code) {}
  ConfigErrc code() const noexcept { return code_; }

 private:
  ConfigErrc code_;
};

/// Reconstruction parameters. Defaults are the capsicum settings; `offsetL`
/// and `alpha` default to 2*gridStep and 5*offsetL when left unset.
struct Config {
  int denoiseNbrs = 50;
  double denoiseThreshold = 0.15;
  double gridStep = 0.5;
  int pcaNbrs = 50;
  double coarseGridStep = 2.0;
  int graphNbrs = 10;
  std::optional<double> offsetL;
  int nMin = 2000;
  int nMax = 5000;
  double expand = 1.1;
  int splineOrder = 3;
  int dimension = 3;
  bool gcv = false;          // smoothing=gcv
  double smoothing = 1e-3;   // used when gcv is false
  double gcvLow = 1e-6;
  double gcvHigh = 1e-1;
  std::optional<double> alpha;
  double isoGridStep = 0.25;
  WeightKernel weightKernel = WeightKernel::wendland_c2;
  double nodeBudget = 2e8;

  double offset_length() const { return offsetL.value_or(2.0 * gridStep); }
  double alpha_radius() const { return alpha.value_or(5.0 * offset_length()); }

  /// Throws ConfigError with a distinct code for each violated constraint.
  void validate() const;

  /// Applies one `key=value` assignment. Unknown keys are rejected.
  void set(std::string_view key, std::string_view value);

  /// Every key accepted by set(), in file order.
  static const std::vector<std::string>& keys();

  /// Flat `key=value` lines, one per key, suitable for load_config().
  std::string to_text() const;
};

Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

}  // namespace leafrecon

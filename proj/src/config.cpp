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

#include "leafrecon/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace leafrecon {

const char* to_string(ConfigErrc code) {
  switch (code) {
    case ConfigErrc::malformed_line: return "malformed line";
    case ConfigErrc::unknown_key: return "unknown key";
    case ConfigErrc::bad_value: return "bad value";
    case ConfigErrc::invalid_count: return "invalid count";
    case ConfigErrc::nonpositive_length: return "non-positive length";
    case ConfigErrc::nmin_exceeds_nmax: return "nMin exceeds nMax";
    case ConfigErrc::expand_below_one: return "expand below one";
    case ConfigErrc::negative_smoothing: return "negative smoothing";
    case ConfigErrc::invalid_gcv_bracket: return "invalid gcv bracket";
    case ConfigErrc::order_not_positive: return "2m-d not positive";
    case ConfigErrc::unsupported_dimension: return "unsupported dimension";
    case ConfigErrc::unsupported_order: return "unsupported spline order";
  }
  return "config error";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(ConfigErrc::bad_value,
                      std::string(key) + "=" + std::string(value));
  }
  return out;
}

int parse_int(std::string_view key, std::string_view value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(ConfigErrc::bad_value,
                      std::string(key) + "=" + std::string(value));
  }
  return out;
}

void require_positive(const char* name, double v) {
  if (!(v > 0.0)) {
    throw ConfigError(ConfigErrc::nonpositive_length,
                      std::string(name) + " must be > 0");
  }
}

void require_count(const char* name, int v, int lo) {
  if (v < lo) {
    throw ConfigError(ConfigErrc::invalid_count,
                      std::string(name) + " must be >= " + std::to_string(lo));
  }
}

// Shortest text that reads back to the same double.
std::string format_double(double v) { return fmt::format("{}", v); }

}  // namespace

void Config::validate() const {
  require_count("denoiseNbrs", denoiseNbrs, 1);
  require_count("pcaNbrs", pcaNbrs, 3);
  require_count("graphNbrs", graphNbrs, 1);
  require_count("nMin", nMin, 1);
  require_count("nMax", nMax, 1);
  if (!std::isfinite(denoiseThreshold)) {
    throw ConfigError(ConfigErrc::bad_value, "denoiseThreshold must be finite");
  }
  require_positive("gridStep", gridStep);
  require_positive("coarseGridStep", coarseGridStep);
  require_positive("offsetL", offset_length());
  require_positive("alpha", alpha_radius());
  require_positive("isoGridStep", isoGridStep);
  require_positive("nodeBudget", nodeBudget);
  if (nMin > nMax) {
    throw ConfigError(ConfigErrc::nmin_exceeds_nmax,
                      std::to_string(nMin) + " > " + std::to_string(nMax));
  }
  if (!(expand >= 1.0)) {
    throw ConfigError(ConfigErrc::expand_below_one, format_double(expand));
  }
  if (!(smoothing >= 0.0)) {
    throw ConfigError(ConfigErrc::negative_smoothing, format_double(smoothing));
  }
  if (!(gcvLow > 0.0 && gcvLow < gcvHigh)) {
    throw ConfigError(ConfigErrc::invalid_gcv_bracket,
                      format_double(gcvLow) + ".." + format_double(gcvHigh));
  }
  if (2 * splineOrder - dimension <= 0) {
    throw ConfigError(ConfigErrc::order_not_positive,
                      "m=" + std::to_string(splineOrder) +
                          " d=" + std::to_string(dimension));
  }
  if (dimension != 3) {
    throw ConfigError(ConfigErrc::unsupported_dimension,
                      "the pipeline works in d=3, got " + std::to_string(dimension));
  }
  if (splineOrder < 2 || splineOrder > 4) {
    throw ConfigError(ConfigErrc::unsupported_order,
                      "m must be 2, 3 or 4 in d=3, got " + std::to_string(splineOrder));
  }
}

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> k = {
      "denoiseNbrs", "denoiseThreshold", "gridStep",   "pcaNbrs",
      "coarseGridStep", "graphNbrs",     "offsetL",    "nMin",
      "nMax",        "expand",           "splineOrder", "dimension",
      "smoothing",   "gcvLow",           "gcvHigh",    "alpha",
      "isoGridStep", "weightKernel",     "nodeBudget"};
  return k;
}

void Config::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "denoiseNbrs") denoiseNbrs = parse_int(key, value);
  else if (key == "denoiseThreshold") denoiseThreshold = parse_double(key, value);
  else if (key == "gridStep") gridStep = parse_double(key, value);
  else if (key == "pcaNbrs") pcaNbrs = parse_int(key, value);
  else if (key == "coarseGridStep") coarseGridStep = parse_double(key, value);
  else if (key == "graphNbrs") graphNbrs = parse_int(key, value);
  else if (key == "offsetL") offsetL = parse_double(key, value);
  else if (key == "nMin") nMin = parse_int(key, value);
  else if (key == "nMax") nMax = parse_int(key, value);
  else if (key == "expand") expand = parse_double(key, value);
  else if (key == "splineOrder") splineOrder = parse_int(key, value);
  else if (key == "dimension") dimension = parse_int(key, value);
  else if (key == "smoothing") {
    if (value == "gcv") {
      gcv = true;
    } else {
      gcv = false;
      smoothing = parse_double(key, value);
    }
  } else if (key == "gcvLow") gcvLow = parse_double(key, value);
  else if (key == "gcvHigh") gcvHigh = parse_double(key, value);
  else if (key == "alpha") alpha = parse_double(key, value);
  else if (key == "isoGridStep") isoGridStep = parse_double(key, value);
  else if (key == "weightKernel") {
    if (value == "wendland-C2") weightKernel = WeightKernel::wendland_c2;
    else if (value == "wendland-C4") weightKernel = WeightKernel::wendland_c4;
    else throw ConfigError(ConfigErrc::bad_value, "weightKernel=" + std::string(value));
  } else if (key == "nodeBudget") nodeBudget = parse_double(key, value);
  else throw ConfigError(ConfigErrc::unknown_key, std::string(key));
}

std::string Config::to_text() const {
  std::ostringstream os;
  os << "denoiseNbrs=" << denoiseNbrs << '\n'
     << "denoiseThreshold=" << format_double(denoiseThreshold) << '\n'
     << "gridStep=" << format_double(gridStep) << '\n'
     << "pcaNbrs=" << pcaNbrs << '\n'
     << "coarseGridStep=" << format_double(coarseGridStep) << '\n'
     << "graphNbrs=" << graphNbrs << '\n'
     << "offsetL=" << format_double(offset_length()) << '\n'
     << "nMin=" << nMin << '\n'
     << "nMax=" << nMax << '\n'
     << "expand=" << format_double(expand) << '\n'
     << "splineOrder=" << splineOrder << '\n'
     << "dimension=" << dimension << '\n'
     << "smoothing=" << (gcv ? std::string("gcv") : format_double(smoothing)) << '\n'
     << "gcvLow=" << format_double(gcvLow) << '\n'
     << "gcvHigh=" << format_double(gcvHigh) << '\n'
     << "alpha=" << format_double(alpha_radius()) << '\n'
     << "isoGridStep=" << format_double(isoGridStep) << '\n'
     << "weightKernel="
     << (weightKernel == WeightKernel::wendland_c2 ? "wendland-C2" : "wendland-C4") << '\n'
     << "nodeBudget=" << format_double(nodeBudget) << '\n';
  return os.str();
}

Config parse_config(std::string_view text) {
  Config config;
  std::size_t lineNo = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++lineNo;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(ConfigErrc::malformed_line,
                        "line " + std::to_string(lineNo) + ": expected key=value");
    }
    config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  config.validate();
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace leafrecon

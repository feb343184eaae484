// Copyright 2026 The isdsim Authors
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
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "isd/hole_burning.hpp"
#include "isd/isd_maps.hpp"
#include "isd/monte_carlo.hpp"
#include "isd/validation.hpp"

namespace isd {

/// Everything one `isdsim` invocation needs, after the config file and the
/// command-line overrides have been merged.
struct RunConfig {
  std::string subcommand;
  Scenario scenario;
  std::string preset = "fast";
  std::filesystem::path cache_dir = ".isdsim-cache";
  std::filesystem::path output_dir = "isdsim-out";
  int workers = 1;

  // burn
  int qubit_count = 51;
  double burn_grid_step_hz = 10e3;

  // campaign
  std::string mode = "standard";  // standard | per-gate | truncation
  std::vector<std::pair<int, int>> per_gate_runs{{1, 1}, {1, 10}, {10, 10}, {10, 50}};
  std::vector<double> truncation_n{1, 2, 5, 10, 20, 50, 100};
  std::vector<double> truncation_r_nm{5, 10, 20, 30, 40, 50};

  // validate
  std::string study = "crosstalk";
  int ions = 1;
  int cases = 100;

  // dump
  std::string dump_what = "inside";  // inside | outside | excitation | profile
  double dump_shift_hz = 0.0;

  /// Merges a JSON document into `base`; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig load(const std::filesystem::path& path, RunConfig base);
  /// Throws std::invalid_argument on anything unusable.
  void validate() const;

  BurnConfig burn_config() const;
  MapResolution resolution() const { return MapResolution::preset_named(preset); }

  /// Result-determining fields only: paths and the worker count are left out
  /// so that they never change an output byte.
  nlohmann::json to_json() const;
  std::string hash() const;
};

}  // namespace isd

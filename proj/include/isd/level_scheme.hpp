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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"

namespace isd {

/// Which hyperfine levels play the qubit roles. Ground/excited indices refer to
/// LevelScheme::ground_hz / excited_hz.
struct RoleMap {
  int zero = 0;
  int one = 1;
  int aux = 2;
  int excited = 2;
};

/// Hyperfine structure of one dopant: three degenerate-pair ground levels,
/// three excited levels and the relative oscillator strengths between them.
///
/// Energies are in Hz, measured in a frame where the qubit |0> level sits at 0
/// and the |0> -> |e> optical transition sits at 0, so the frequency of the
/// transition g -> e is excited_hz[e] - ground_hz[g].
struct LevelScheme {
  std::string name = "custom";
  int version = 1;
  std::array<std::string, 3> ground_labels{"1/2g", "3/2g", "5/2g"};
  std::array<std::string, 3> excited_labels{"1/2e", "3/2e", "5/2e"};
  std::array<double, 3> ground_hz{};
  std::array<double, 3> excited_hz{};
  /// Rows are ground levels, columns excited levels.
  Eigen::Matrix3d strength = Eigen::Matrix3d::Constant(1.0 / 3.0);
  RoleMap roles;

  double transition_hz(int ground, int excited) const {
    return excited_hz[excited] - ground_hz[ground];
  }
  /// Frequency of gate color 0 (|0> -> |e>) and color 1 (|1> -> |e>).
  double color_hz(int color) const;
  /// Design strength of the transition addressed by a gate color.
  double design_strength(int color) const;
  /// Decay branching from `excited` into `ground`; sums to 1 over ground.
  double branching(int ground, int excited) const;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  nlohmann::json to_json() const;
  static LevelScheme from_json(const nlohmann::json& j);
  static LevelScheme load(const std::filesystem::path& path);
  /// Stable 64-bit digest of the canonical JSON form.
  std::uint64_t hash() const;

  /// 153Eu:Y2SiO5 site 1 at zero field.
  static LevelScheme eu153_site1();
};

/// FNV-1a over a byte string. Used for all cache keys.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace isd

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
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "isd/bloch.hpp"
#include "isd/dopri5.hpp"
#include "isd/hole_burning.hpp"
#include "isd/level_scheme.hpp"
#include "isd/pulse.hpp"

namespace isd {

/// Grid resolution of the lookup tables. Presets: "full" (fine), "fast"
/// (desk-scale) and "ci" (test-suite scale).
struct MapResolution {
  std::string preset = "fast";
  /// Nonzero shift nodes per sign, log spaced over [shift_min_hz, shift_max_hz].
  int shifts_per_sign = 21;
  double shift_min_hz = 1.0e3;
  double shift_max_hz = 100.0e6;
  /// Background detuning spacing of the inside map.
  double detuning_step_hz = 10.0e6;
  /// Extra detuning nodes at +-offset around every resonant detuning.
  std::vector<double> resonance_offsets_hz;
  /// Outside map: p = 0 plus p_points log-spaced values over [p_min, p_max].
  int p_points = 33;
  double p_min = 1.0e-9;
  double p_max = 1.0;
  /// Excitation curves: background spacing and resonance refinement.
  double excitation_step_hz = 10.0e6;
  std::vector<double> excitation_offsets_hz;
  Tolerance map_tol{1e-8, 1e-8};
  Tolerance excitation_tol{1e-8, 1e-10};

  static MapResolution preset_named(const std::string& name);
  nlohmann::json to_json() const;
  std::uint64_t hash() const;
};

/// 0 plus n log-spaced magnitudes per sign, ascending.
std::vector<double> signed_log_grid(int per_sign, double min_hz, double max_hz);

/// Detunings in the channel at which a gate color meets one of the nine
/// optical transitions of a non-qubit ion, sorted and deduplicated.
std::vector<double> resonant_detunings(const LevelScheme& scheme);

/// Uniform grid over the channel merged with the resonance refinements.
std::vector<double> channel_detuning_grid(const LevelScheme& scheme, double step_hz,
                                          const std::vector<double>& offsets_hz);

/// Linear-interpolation coordinate of the shift axis.
inline double shift_coordinate(double dnu_hz) { return std::asinh(dnu_hz / 1.0e3); }

/// Qubit Bloch vector after the NOT gate when one six-level ion at detuning
/// `detuning_hz`, starting in ground level `state`, sits at shift `shift_hz`.
BlochVector simulate_inside_point(const LevelScheme& scheme, const TwoColorGate& gate,
                                  double shift_hz, double detuning_hz, int state,
                                  const Tolerance& tol);

/// Qubit Bloch vector after the NOT gate with no neighbor at all.
BlochVector simulate_reference(const TwoColorGate& gate, const Tolerance& tol);

class MapFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shift x detuning x initial-state table for non-qubit ions in the qubit's own channel.
class InsideMap {
 public:
  static constexpr double kMaxShift = 100.0e6;
  static constexpr int kVersion = 1;

  std::vector<double> shift_grid;
  std::vector<double> detuning_grid;
  /// values[state][i_shift * detuning_grid.size() + i_detuning]
  std::array<std::vector<BlochVector>, 3> values;
  BlochVector reference = not_target_bloch();
  MapResolution resolution;
  LevelScheme scheme;
  TwoColorGate gate;

  const BlochVector& at(int state, std::size_t i_shift, std::size_t i_detuning) const {
    return values[state][i_shift * detuning_grid.size() + i_detuning];
  }
  /// Bilinear interpolation in (shift_coordinate, detuning). |shift| <= kMaxShift.
  BlochVector interpolate(double shift_hz, double detuning_hz, int state) const;
  /// Effect relative to the neighbor-free gate. Shifts beyond kMaxShift are simulated.
  ErrorSourceEffect query(double shift_hz, double detuning_hz, int state) const;

  std::uint64_t key() const;
  void validate() const;
  void save(const std::filesystem::path& path) const;
  static InsideMap load(const std::filesystem::path& path);
};

InsideMap generate_inside_map(const MapResolution& res, const LevelScheme& scheme,
                              const TwoColorGate& gate, int workers = 1);

/// Cache key of the inside map that `generate_inside_map` would produce.
std::uint64_t inside_map_key(const MapResolution& res, const LevelScheme& scheme,
                             const TwoColorGate& gate);

inline ErrorSourceEffect query_inside(const InsideMap& map, double shift_hz, double detuning_hz,
                                      int state) {
  return map.query(shift_hz, detuning_hz, state);
}

/// Total excited population of a six-level ion driven by its own qubit's gates,
/// per initial ground level, after 1 and after 10 NOT gates.
class ExcitationCurves {
 public:
  static constexpr int kVersion = 1;
  static constexpr std::array<int, 2> kGates{1, 10};

  std::vector<double> detuning_grid;
  /// excited[gate slot][ground level][detuning index]
  std::array<std::array<std::vector<double>, 3>, 2> excited;
  MapResolution resolution;
  LevelScheme scheme;
  TwoColorGate gate;
  bool lindblad = true;

  static int slot(int gates);
  /// Interpolation of one ground level's curve, log-linear between positive nodes.
  double per_ground(int gates, int ground, double detuning_hz) const;
  /// Excited population after `gates` gates of an ion at `detuning_hz` whose
  /// ground level is drawn from `profile` (uniform when null). gates = 0 gives 0.
  double excited_population(int gates, double detuning_hz,
                            const PopulationProfile* profile) const;

  std::uint64_t key() const;
  void validate() const;
  void save(const std::filesystem::path& path) const;
  static ExcitationCurves load(const std::filesystem::path& path);
};

ExcitationCurves generate_excitation_curves(const MapResolution& res, const LevelScheme& scheme,
                                            const TwoColorGate& gate, int workers = 1);
std::uint64_t excitation_curves_key(const MapResolution& res, const LevelScheme& scheme,
                                    const TwoColorGate& gate);

/// Excitation after `gates` gates at one detuning and initial ground level.
std::array<double, 2> simulate_excitation(const LevelScheme& scheme, const TwoColorGate& gate,
                                          double detuning_hz, int ground, const Tolerance& tol);

/// Shift x excited-population table for idle, partly excited ions of other channels.
class OutsideMap {
 public:
  static constexpr double kMaxShift = 100.0e6;
  static constexpr int kVersion = 1;

  std::vector<double> shift_grid;
  std::vector<double> p_grid;  // p_grid[0] == 0
  /// values[i_shift * p_grid.size() + i_p]
  std::vector<BlochVector> values;
  BlochVector target = not_target_bloch();
  MapResolution resolution;
  TwoColorGate gate;

  const BlochVector& at(std::size_t i_shift, std::size_t i_p) const {
    return values[i_shift * p_grid.size() + i_p];
  }
  /// Shifts beyond kMaxShift use the kMaxShift column. Throws for p outside the table.
  BlochVector interpolate(double shift_hz, double p) const;
  ErrorSourceEffect query(double shift_hz, double p) const;

  std::uint64_t key() const;
  void validate() const;
  void save(const std::filesystem::path& path) const;
  static OutsideMap load(const std::filesystem::path& path);
};

OutsideMap generate_outside_map(const MapResolution& res, const TwoColorGate& gate,
                                int workers = 1);
std::uint64_t outside_map_key(const MapResolution& res, const TwoColorGate& gate);

/// Qubit Bloch vector after the NOT gate next to an idle ion that is fully
/// excited and shifts the qubit's excited level by `shift_hz`.
BlochVector simulate_outside_excited(const TwoColorGate& gate, double shift_hz,
                                     const Tolerance& tol);

inline ErrorSourceEffect query_outside(const OutsideMap& map, double shift_hz, double p) {
  return map.query(shift_hz, p);
}

/// Effect of `observed` relative to `reference`; shrinkage is measured against |reference|.
ErrorSourceEffect relative_effect(const BlochVector& observed, const BlochVector& reference);

}  // namespace isd

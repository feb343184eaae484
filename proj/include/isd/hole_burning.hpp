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
#include <vector>

#include "isd/level_scheme.hpp"

namespace isd {

/// Frequency-scanned burn pulse of the rate model. Frequencies are relative to
/// the |0> -> |e> transition of the qubit the pulse belongs to.
struct BurnPulse {
  std::string name;
  double nu_c = 0.0;      // Hz
  double nu_scan = 0.0;   // Hz
  double nu_slope = 0.0;  // Hz
  int design_ground = 0;
  int design_excited = 2;
  double design_efficiency = 0.6;

  void validate() const;
  /// Efficiency on transition (ground, excited): sqrt strength ratio, capped at 1.
  double efficiency(int ground, int excited, const LevelScheme& scheme) const;
};

/// Probability that `pulse` moves population across (ground, excited) when that
/// transition sits at `nu` (Hz, same reference as the pulse centre).
double transfer_probability(double nu, const BurnPulse& pulse, int ground, int excited,
                            const LevelScheme& scheme, double t2 = 2.6e-3);

/// The five pulses of the window preparation. `nu_init` (Hz) sets the width of
/// the two qubit initialization pulses.
std::array<BurnPulse, 5> standard_burn_pulses(double nu_init);

struct BurnStep {
  std::string goal;
  std::vector<int> pulses;  // indices into the pulse set
  int repetitions = 1;
  bool decay = true;
};

std::vector<BurnStep> standard_burn_sequence();

/// Six-level populations (three grounds then three excited) over a detuning
/// grid relative to the qubit's |0> -> |e> transition.
class PopulationProfile {
 public:
  static constexpr double kLow = -335.0e6;
  static constexpr double kHigh = 665.0e6;
  static constexpr double kPeriod = 1.0e9;

  using Populations = std::array<double, 6>;

  PopulationProfile() = default;
  PopulationProfile(std::vector<double> grid_hz, std::vector<Populations> populations);

  /// Uniform ground-state mixture on a grid with `step` spacing, plus optional
  /// 1 kHz refinement of +-`refine_half_width` around zero detuning.
  static PopulationProfile uniform(double step = 10e3, double refine_half_width = 0.0);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Populations>& populations() const { return pop_; }
  std::vector<Populations>& populations() { return pop_; }
  std::size_t size() const { return grid_.size(); }

  /// Ground-state probabilities at detuning `nu` (Hz), periodic with 1 GHz,
  /// linear interpolation between grid points, renormalized over the grounds.
  std::array<double, 3> ground_probabilities(double nu) const;
  Populations at(double nu) const;

  /// Maximum deviation of a population sum from 1.
  double conservation_error() const;
  void validate(double tol = 1e-9) const;

  /// Columnar text: detuning_hz, p_g0, p_g1, p_g2, p_e0, p_e1, p_e2.
  void save_csv(const std::filesystem::path& path, const std::string& header_comment = {}) const;
  static PopulationProfile load_csv(const std::filesystem::path& path);
  std::uint64_t hash() const;

  /// Metadata carried with the profile.
  double nu_init = 0.0;
  double qubit_zero_population = 0.0;

 private:
  std::vector<double> grid_;
  std::vector<Populations> pop_;
};

/// Applies one pulse on behalf of the qubits at the given channel offsets (Hz)
/// to every grid point, then optionally lets the excited population decay.
void apply_pulse(PopulationProfile& profile, const BurnPulse& pulse, const LevelScheme& scheme,
                 bool decay, const std::vector<double>& qubit_offsets_hz = {0.0});

/// Excited population redistributes to the grounds with oscillator-strength branching.
void decay_to_ground(PopulationProfile::Populations& p, const LevelScheme& scheme);

struct BurnConfig {
  double nu_init = 0.0;   // Hz
  int qubit_count = 51;
  double grid_step = 10e3;  // Hz
  /// Multiplies every repetition count (convergence studies).
  double repetition_scale = 1.0;
  double t2 = 2.6e-3;
};

/// Channel centre of qubit q relative to qubit 0 (Hz).
double qubit_offset_hz(int q);

/// Runs the full preparation sequence interleaved over all qubits and returns
/// the populations seen around the central qubit.
PopulationProfile run_scheme(const BurnConfig& config, const LevelScheme& scheme);

struct WindowEdges {
  // Edges relative to the centre of each qubit transition (Hz).
  double zero_lo = 0.0, zero_hi = 0.0;
  double one_lo = 0.0, one_hi = 0.0;
};

/// Largest achievable zero-absorption regions around both qubit transitions,
/// placing every ion in the ground state whose transitions are furthest from
/// both qubit transitions.
WindowEdges compute_max_windows(const LevelScheme& scheme, double step_hz = 0.5e3);

/// Absorption at frequency `nu` (Hz, relative to the qubit's |0> -> |e>) from
/// the whole ion ensemble: sum over transitions of strength times the ground
/// population of the ions whose transition lands on `nu`. Equals 1 before burning.
double absorption(const PopulationProfile& profile, const LevelScheme& scheme, double nu);

}  // namespace isd

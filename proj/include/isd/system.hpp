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
#include <complex>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "isd/level_scheme.hpp"
#include "isd/pulse.hpp"

namespace isd {

using DensityMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

enum class IonKind { TwoLevel, ThreeLevel, SixLevel };

enum class DriveMode {
  None,      // ignores the gate pulses
  Intended,  // color 0 only on |0>-|e>, color 1 only on |1>-|e>
  All,       // both colors on every optical transition
};

/// One ion of a composite system. The first ion of a composite is the qubit.
struct IonModel {
  IonKind kind = IonKind::ThreeLevel;
  /// Offset of this ion's optical transitions from the qubit's (Hz).
  double detuning_hz = 0.0;
  DriveMode drive = DriveMode::Intended;
  /// |0>-|1> splitting of a three-level ion (Hz); |1> lies below |0>.
  double ground_splitting_hz = 90.0e6;

  int level_count() const;

  static IonModel ideal(double detuning_hz = 0.0) {
    return {IonKind::ThreeLevel, detuning_hz, DriveMode::Intended, 90.0e6};
  }
  static IonModel six_level(double detuning_hz, DriveMode drive) {
    return {IonKind::SixLevel, detuning_hz, drive, 90.0e6};
  }
  static IonModel idle_two_level() { return {IonKind::TwoLevel, 0.0, DriveMode::None, 0.0}; }
};

/// Level bookkeeping of a single ion in the rotating frame.
struct LocalLevels {
  struct Transition {
    int ground;
    int excited;
    std::array<double, 2> strength;  // Rabi scale per color
    double branching;                // decay weight from `excited` into `ground`
  };
  std::vector<double> energy_hz;  // rotating-frame diagonal
  std::vector<double> bare_hz;    // level energies without the frame (for coupling rates)
  std::vector<bool> excited;
  std::vector<Transition> transitions;
  int zero = 0;  // computational |0>
  int one = 1;   // computational |1>
};

LocalLevels local_levels(const IonModel& ion, const LevelScheme& scheme);

/// Coupling between composite basis states `lower` -> `upper` from one gate color.
/// Its matrix element is 0.5 * strength * Omega_c(t) exp(i phi_c) exp(i 2 pi rate t).
struct Coupling {
  int upper;
  int lower;
  int color;
  double strength;
  int rate;  // index into Hamiltonian::rates_hz
};

/// Composite system description: ions (qubit first) plus symmetric pairwise
/// excitation-dependent shifts in Hz.
struct SystemSpec {
  std::vector<IonModel> ions;
  Eigen::MatrixXd shifts_hz;  // empty means all zero
  LevelScheme scheme = LevelScheme::eu153_site1();
  std::size_t dimension_cap = 4096;
  /// Gate color frequencies in the frame (Hz). Unset: taken from the first ion.
  std::optional<std::array<double, 2>> colors_hz;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Jump operator sqrt(weight / T1) * sum |to><from| of one decay path of one ion.
struct DecayChannel {
  double weight;                         // branching ratio of this path
  std::vector<std::pair<int, int>> map;  // (from, to) composite index pairs
};

/// Rotating-frame Hamiltonian of a composite system. Ground levels are static,
/// excited levels rotate with gate color 0, so time dependence enters only
/// through the drive envelope and the per-coupling rates.
class Hamiltonian {
 public:
  std::vector<int> dims;
  Eigen::VectorXd diag_hz;
  std::vector<Coupling> couplings;
  std::vector<double> rates_hz;
  /// Bit m is set when ion m is in an excited level.
  std::vector<std::uint32_t> excited_mask;
  std::vector<DecayChannel> decay;
  std::array<double, 2> colors_hz{0.0, 0.0};

  int dim() const { return static_cast<int>(diag_hz.size()); }
  int ion_count() const { return static_cast<int>(dims.size()); }

  /// Dense H(t) in rad/s.
  Eigen::MatrixXcd matrix(double t, const PulseTrain& train) const;
};

Hamiltonian build_hamiltonian(const SystemSpec& spec);

/// Stride of ion `m` in the row-major composite index.
std::vector<int> strides(const std::vector<int>& dims);

/// Kronecker product of per-ion states (qubit first).
DensityMatrix tensor_density(const std::vector<DensityMatrix>& factors);
StateVector tensor_state(const std::vector<StateVector>& factors);

/// (|0> + i|1>)/sqrt(2) on the computational levels of a qubit with `levels` levels.
StateVector qubit_plus_i(const LocalLevels& qubit, int levels);

}  // namespace isd

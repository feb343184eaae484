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
#include <vector>

#include <Eigen/Dense>

#include "isd/hole_burning.hpp"
#include "json.hpp"

namespace isd {

struct UnitCell {
  struct AsymmetricSite {
    std::string label;
    Eigen::Vector3d fractional;
    int coordination = 6;
  };
  struct Site {
    Eigen::Vector3d fractional;
    int site_class = 1;   // spectral site: 1 for coordination 6, 2 for 7
    int orientation = 0;  // 0 identity, 1 inversion, 2 mirror of b, 3 two-fold along b
  };

  double a_nm = 1.44137, b_nm = 0.6719, c_nm = 1.040;
  double alpha_deg = 90.0, beta_deg = 122.235, gamma_deg = 90.0;
  std::vector<AsymmetricSite> asymmetric;
  double d1_angle_from_c_deg = 23.8;
  double delta_mu_cm = 7.6e-32;
  double epsilon_static = 11.0;

  static UnitCell from_json(const nlohmann::json& j);
  static UnitCell load(const std::filesystem::path& path);
  /// The X2 Y2SiO5 cell shipped in data/y2sio5_x2_lattice.json.
  static UnitCell y2sio5();

  /// Columns are the a, b, c lattice vectors in nm (x along a, y along b).
  Eigen::Matrix3d basis() const;
  /// All 16 yttrium sites of one cell, wrapped into [0, 1).
  std::vector<Site> sites() const;
  /// Unit D1 axis in Cartesian coordinates.
  Eigen::Vector3d d1_axis() const;
  /// Static dipole difference of an ion in the given orientation class (C m).
  Eigen::Vector3d delta_mu(int orientation) const;
  void validate() const;
  std::uint64_t hash() const;
};

/// Prefactor (eps+2)^2/(9 eps) / (4 pi eps0 h) in Hz m^3 / (C m)^2.
double dipole_constant(double epsilon_static = 11.0);

/// Channel bookkeeping for a detuning from qubit 0.
struct ChannelAssignment {
  static constexpr int kOutside = -1;
  int qubit = 0;              // corresponding qubit, kOutside beyond any representable channel
  double offset_hz = 0.0;     // detuning from that qubit's |0> -> |e>
};

/// Qubit q sits at +ceil(q/2) GHz for odd q and -q/2 GHz for even q; an ion
/// belongs to q when its detuning from q lies in [-335, 665) MHz.
ChannelAssignment channel_index(double detuning_hz);

struct DopedIon {
  Eigen::Vector3d position_nm = Eigen::Vector3d::Zero();
  Eigen::Vector3d delta_mu = Eigen::Vector3d::Zero();  // C m
  int site_class = 1;
  int orientation = 0;
  double detuning_hz = 0.0;
  ChannelAssignment channel;
  int initial_state = 0;  // ground label 0..2
  double shift_to_qubit_hz = 0.0;
  double distance_nm = 0.0;
};

/// Shift of one ion's transition when the other is excited (Hz).
double dipole_shift(const DopedIon& a, const DopedIon& b, double epsilon_static = 11.0);

struct IonSurrounding {
  DopedIon qubit;
  std::vector<DopedIon> neighbors;  // site-1 dopants only
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  double c_total = 0.0;
  double radius_nm = 50.0;
  std::size_t site2_dopants = 0;
  std::size_t site1_positions = 0;  // candidate site-1 positions inside the sphere

  nlohmann::json to_json() const;
};

struct DopingOptions {
  double radius_nm = 50.0;
  double site1_fraction = 0.5;  // share of all dopants that occupy site 1
};

/// Inhomogeneous FWHM: 1.8 GHz + 1800 GHz * c_total.
double inhomogeneous_fwhm(double c_total);

/// Places the qubit at the site-1 position nearest the cell origin, centres the
/// sphere on it and dopes every yttrium position independently.
IonSurrounding dope_sphere(const UnitCell& cell, double c_total, std::uint64_t seed,
                           std::uint64_t trial = 0, const DopingOptions& options = {});

/// Lorentzian detunings (qubit pinned at 0), channels, and shifts to the qubit.
void assign_frequencies(IonSurrounding& s);

/// Uniform ground states without windows, profile-weighted with windows.
void assign_initial_states(IonSurrounding& s, const PopulationProfile* windows);

}  // namespace isd

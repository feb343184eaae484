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

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "isd/bloch.hpp"

namespace isd {

/// Closed-form ISD error of a NOT gate with one resonant spectator ion, both
/// starting in |0> + i|1>. Only meaningful while the shift is small compared
/// with the pulse bandwidth.
double theory_error_one_ion(double delta_nu_hz, double t_e);

struct TheoryConfig {
  double t_e = 1.40e-6;  // s
  double phi = 0.0;      // relative phase phi1 - phi0 of the two colors
  double theta = 0.0;    // gate phase
  int n = 0;             // spectator ions
  /// (n+1) x (n+1), index 0 is the qubit. Only the first row enters the result.
  Eigen::MatrixXd shifts_hz;
  /// Bit j-1 of s is set when spectator j is bright. Length 2^n each.
  std::vector<std::complex<double>> a_bright;  // qubit bright
  std::vector<std::complex<double>> a_dark;    // qubit dark

  static constexpr int kMaxIons = 12;

  /// Spectators and the qubit start in product states; each entry of
  /// `ions` holds (c0, c1). Element 0 is the qubit.
  static TheoryConfig product(double t_e, double phi, double theta,
                              const std::vector<Eigen::Vector2cd>& ions,
                              const Eigen::MatrixXd& shifts_hz);
  /// Everybody in (|0> + i|1>)/sqrt(2), NOT gate phases.
  static TheoryConfig not_gate_plus_i(double t_e, const Eigen::MatrixXd& shifts_hz);

  void validate() const;
};

class TheoryCapError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

BlochVector theory_bloch(const TheoryConfig& config);

/// Bright and dark amplitudes <B|c>, <D|c> of a single-ion state.
std::pair<std::complex<double>, std::complex<double>> bright_dark(const Eigen::Vector2cd& c,
                                                                  double phi);

struct TeFit {
  double t_e = 0.0;
  double rms_residual = 0.0;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares fit of theory_error_one_ion over t_e. `guess` centers the
/// search window (one decade either side).
TeFit fit_te(const std::vector<std::pair<double, double>>& data, double guess = 1.4e-6);

}  // namespace isd

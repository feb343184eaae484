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

#include <vector>

#include <Eigen/Dense>

#include "isd/system.hpp"

namespace isd {

/// (u, v, w) with u = rho01 + rho10, v = i(rho01 - rho10), w = rho00 - rho11.
using BlochVector = Eigen::Vector3d;

inline BlochVector initial_bloch() { return {0.0, 1.0, 0.0}; }
/// Error-free result of the NOT gate on (|0> + i|1>)/sqrt(2).
inline BlochVector not_target_bloch() { return {0.0, -1.0, 0.0}; }

struct QubitState {
  Eigen::Matrix2cd rho;  // {|0>,|1>} block of the reduced matrix, not renormalized
  double leakage = 0.0;  // qubit population outside the block
};

/// Partial trace over every factor but the first, then projection onto the
/// qubit levels `zero` and `one` of the first factor.
QubitState reduce_to_qubit(const DensityMatrix& rho_full, const std::vector<int>& dims, int zero,
                           int one);
/// Same for a pure composite state.
QubitState reduce_pure(const StateVector& psi, const std::vector<int>& dims, int zero, int one);

BlochVector bloch_vector(const Eigen::Matrix2cd& rho);
/// 1 - <target|rho|target>.
double gate_error(const Eigen::Matrix2cd& rho, const Eigen::Vector2cd& target);
/// Error of a Bloch vector against a pure target direction: (1 - a . t) / 2.
double error_from_bloch(const BlochVector& a, const BlochVector& target);

struct ErrorSourceEffect {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double shrinkage = 1.0;
  double angle = 0.0;  // rad

  static ErrorSourceEffect identity() { return {}; }
  BlochVector apply(const BlochVector& a) const { return shrinkage * (rotation * a); }
  bool is_identity() const { return shrinkage == 1.0 && angle == 0.0; }
};

/// Rotation taking `reference` (unit length) onto the direction of `observed`
/// by the smallest angle, and shrinkage |observed|.
ErrorSourceEffect decompose_effect(const BlochVector& observed, const BlochVector& reference);

/// Applies the effects to a0 starting with the largest rotation angle; equal
/// angles keep their order in `effects`.
BlochVector qbies_compose(const std::vector<ErrorSourceEffect>& effects, const BlochVector& a0);

/// Same, restricted to the effects whose index is listed in `subset`.
BlochVector qbies_compose_subset(const std::vector<ErrorSourceEffect>& effects,
                                 const std::vector<std::size_t>& subset, const BlochVector& a0);

}  // namespace isd

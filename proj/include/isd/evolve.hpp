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

#include "isd/dopri5.hpp"
#include "isd/pulse.hpp"
#include "isd/system.hpp"

namespace isd {

struct LindbladParams {
  bool enabled = false;
  double t1 = 1.9e-3;  // s
  double t2 = 2.6e-3;  // s

  static LindbladParams off() { return {}; }
  static LindbladParams europium() { return {true, 1.9e-3, 2.6e-3}; }
  /// Extra optical dephasing on top of the lifetime limit.
  double pure_dephasing() const { return 1.0 / t2 - 0.5 / t1; }
  void validate() const;
};

struct EvolveStats {
  StepStats steps;
  double trace_error = 0.0;      // |tr(rho) - 1| or |norm^2 - 1|
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  /// Set when an invariant misses its bound by more than 10x the tolerance.
  bool invariant_violation = false;
};

/// Integrates the master equation from t0 to t1 (absolute times on the pulse
/// train clock). Integration restarts at every pulse boundary inside the span.
DensityMatrix evolve(const Hamiltonian& h, const PulseTrain& train, const DensityMatrix& rho0,
                     double t0, double t1, const LindbladParams& lindblad,
                     const Tolerance& tol = {}, EvolveStats* stats = nullptr);

/// Schroedinger evolution of each column of `psi0` (no dissipation).
Eigen::MatrixXcd evolve_pure(const Hamiltonian& h, const PulseTrain& train,
                             const Eigen::MatrixXcd& psi0, double t0, double t1,
                             const Tolerance& tol = {}, EvolveStats* stats = nullptr);

/// `gates` consecutive two-color gates starting at t = 0.
DensityMatrix apply_gate(const DensityMatrix& rho0, const SystemSpec& spec,
                         const TwoColorGate& gate, const LindbladParams& lindblad,
                         const Tolerance& tol = {}, int gates = 1, EvolveStats* stats = nullptr);

Eigen::MatrixXcd apply_gate_pure(const Eigen::MatrixXcd& psi0, const SystemSpec& spec,
                                 const TwoColorGate& gate, const Tolerance& tol = {},
                                 int gates = 1, EvolveStats* stats = nullptr);

}  // namespace isd

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

#include "isd/bloch.hpp"
#include "isd/dopri5.hpp"

namespace isd {

enum class Study { Crosstalk, Decay, MultiIon };

std::string study_name(Study s);
Study parse_study(const std::string& name);

/// One non-qubit ion of a randomized test system.
struct RandomIon {
  /// Three-level ion driven by the gate pulses (starts like the qubit), or an
  /// idle two-level ion with some initial excited population.
  bool driven = true;
  double detuning_hz = 0.0;
  double excited_population = 0.0;
};

struct RandomSystemSpec {
  static constexpr int kMaxIons = 5;

  Study study = Study::MultiIon;
  std::vector<RandomIon> ions;
  /// Symmetric (n+1)x(n+1) table, index 0 is the qubit.
  Eigen::MatrixXd shifts_hz;
  double ground_splitting_hz = 90.0e6;  // crosstalk study
  double t1 = 1.9e-3;                   // decay study
  double t2 = 2.6e-3;

  int n() const { return static_cast<int>(ions.size()); }
  void validate() const;
};

/// Draws every quantity log-uniformly over its range from the (seed, case) stream.
RandomSystemSpec random_system(Study study, int n, std::uint64_t seed, std::uint64_t case_index);

struct SimulationOptions {
  bool crosstalk = false;  // gate colors drive every optical transition
  bool decay = false;      // Lindblad decay and dephasing with spec.t1, spec.t2
  std::vector<int> ions;   // indices into spec.ions to include
  Tolerance tol{1e-10, 1e-10};
};

/// Qubit Bloch vector after the NOT gate on (|0> + i|1>)/sqrt(2).
BlochVector simulate_random_system(const RandomSystemSpec& spec, const SimulationOptions& options);

struct CaseResult {
  std::uint64_t index = 0;
  Study study = Study::MultiIon;
  int n = 1;
  double full_error = 0.0;
  double qbies_error = 0.0;
  double ratio = 1.0;
  bool zero_over_zero = false;
  bool excluded = false;  // denominator below 1e-12 with a nonzero numerator
};

/// Full simulation against the QBies estimate built from separated simulations.
CaseResult run_case(const RandomSystemSpec& spec, std::uint64_t index,
                    const Tolerance& tol = {1e-10, 1e-10});

struct StudySummary {
  Study study = Study::MultiIon;
  int n = 1;
  std::size_t cases = 0, included = 0, excluded = 0, zero_over_zero = 0;
  double median_ratio = 1.0;
  /// Median ratio over included cases with full error below 1e-4.
  double low_error_median = 1.0;
  std::size_t low_error_cases = 0;
  /// Share of cases with |ratio - 1| > 0.05, split at full error 1e-2.
  double deviation_rate_high = 0.0, deviation_rate_low = 0.0;
  std::size_t high_error_cases = 0;
};

struct StudyResult {
  std::vector<CaseResult> cases;
  StudySummary summary;
};

StudyResult validate_study(Study study, int n, int cases, std::uint64_t seed, int workers = 1,
                           const Tolerance& tol = {1e-10, 1e-10});

StudySummary summarize(Study study, int n, const std::vector<CaseResult>& cases);

void write_validation_csv(const std::filesystem::path& path, const std::vector<CaseResult>& cases,
                          const std::string& config_hash);

/// Qubit plus driven three-level ions with the given detunings and qubit shifts
/// (no ion-ion shifts): full simulation and QBies estimate from one-ion runs.
struct GroupComparison {
  BlochVector full;
  BlochVector qbies;
  std::vector<ErrorSourceEffect> effects;
  double full_error = 0.0;
  double qbies_error = 0.0;
};

GroupComparison compare_driven_ions(const std::vector<double>& detunings_hz,
                                    const std::vector<double>& shifts_hz,
                                    const Tolerance& tol = {1e-10, 1e-10});

}  // namespace isd

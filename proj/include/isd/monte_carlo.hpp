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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "isd/bloch.hpp"
#include "isd/hole_burning.hpp"
#include "isd/isd_maps.hpp"
#include "isd/lattice.hpp"

namespace isd {

struct Scenario {
  double c_total = 0.01;
  double radius_nm = 50.0;
  bool use_windows = true;
  double nu_init = 0.0;  // Hz
  int Q = 0;             // other qubits that ran gates before qubit 0
  int G = 0;             // NOT gates per other qubit
  int trials = 1000;
  std::uint64_t seed = 1;
  double site1_fraction = 0.5;

  void validate() const;
  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j, Scenario base);
  static Scenario from_json(const nlohmann::json& j) { return from_json(j, Scenario()); }
  std::uint64_t hash() const;
};

/// Effect of one non-qubit ion on qubit 0.
struct IonContribution {
  ErrorSourceEffect effect;
  int channel = 0;
  double offset_hz = 0.0;  // detuning from the corresponding qubit
  double shift_hz = 0.0;
  double distance_nm = 0.0;
  int initial_state = 0;
  double excited_population = 0.0;  // channels 1..Q only
  double error = 0.0;               // error of this ion alone
};

struct TrialResult {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double error = 0.0;
  std::size_t site1_ions = 0;
  std::size_t inside_ions = 0;   // channel 0
  std::size_t outside_ions = 0;  // channels 1..Q
  std::size_t site2_ions = 0;
  std::size_t exact_fallbacks = 0;
  /// Largest single-ion contribution (zero when no ion acts).
  IonContribution top;
  /// Every non-identity contribution; filled when requested.
  std::vector<IonContribution> contributions;
};

/// Everything a trial reads. Maps may be null when the scenario does not need them.
struct CampaignInputs {
  const UnitCell* cell = nullptr;
  const InsideMap* inside = nullptr;
  const OutsideMap* outside = nullptr;
  const ExcitationCurves* excitation = nullptr;
  const PopulationProfile* profile = nullptr;  // required when use_windows
};

class MissingInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TrialResult run_trial(const Scenario& scenario, std::uint64_t trial, const CampaignInputs& inputs,
                      bool keep_contributions = false);

struct Quantiles {
  double min = 0, p10 = 0, p25 = 0, median = 0, p75 = 0, p90 = 0, p99 = 0, max = 0, mean = 0;
};

/// Linear-interpolated quantile of ascending data.
double quantile(const std::vector<double>& sorted, double q);
Quantiles quantiles(const std::vector<double>& sorted);

struct CampaignResult {
  Scenario scenario;
  std::vector<TrialResult> trials;  // by trial index
  std::vector<double> sorted_errors;
  Quantiles stats;
  double baseline = 0.0;
  /// Fraction of trials whose error exceeds factor * baseline, per factor.
  std::vector<std::pair<double, double>> exceed_fractions;
  /// Bootstrap 95% interval of the median.
  double median_ci_low = 0.0, median_ci_high = 0.0;
};

struct CampaignOptions {
  int workers = 1;
  bool keep_contributions = false;
  std::vector<double> threshold_factors{0.1, 1.0};
  int bootstrap_resamples = 1000;
};

CampaignResult run_campaign(const Scenario& scenario, const CampaignInputs& inputs,
                            const CampaignOptions& options = {});

/// NOT error of the six-level qubit alone with decay, decoherence and full
/// internal crosstalk. Cached per tolerance for the life of the process.
double baseline_error(const Tolerance& tol = {1e-10, 1e-10});

enum class TruncationMode { TopN, Radius };

struct TruncationPoint {
  double parameter = 0.0;      // N or r_max (nm)
  double mean_fraction = 0.0;  // mean over trials of error(subset) / error(all)
  std::size_t monotonicity_violations = 0;
};

/// Recomposes each trial with the N largest contributors or the ions within r_max.
/// Trials with zero total error count as fraction 1.
std::vector<TruncationPoint> truncation_analysis(const std::vector<TrialResult>& trials,
                                                 TruncationMode mode,
                                                 const std::vector<double>& parameters);

struct PerGatePoint {
  int G = 0;
  int Q = 0;
  double median = 0.0;
  /// median / (G * Q); empty when G * Q = 0.
  std::optional<double> per_gate;
};

struct PerGateIncrement {
  std::vector<PerGatePoint> points;
  double slope = 0.0;  // least-squares d(median)/d(G*Q)
  double intercept = 0.0;
};

class InsufficientCampaignsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

PerGateIncrement per_gate_increment(const std::vector<PerGatePoint>& campaigns);

/// Output writers; every file carries `config_hash` and the tool version.
void write_trials_csv(const std::filesystem::path& path, const CampaignResult& r,
                      const std::string& config_hash);
void write_ordered_csv(const std::filesystem::path& path, const CampaignResult& r,
                       const std::string& config_hash);
nlohmann::json campaign_summary_json(const CampaignResult& r, const std::string& config_hash);

}  // namespace isd

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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "isd/monte_carlo.hpp"

using namespace isd;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  UnitCell cell = UnitCell::y2sio5();
  LevelScheme scheme = LevelScheme::eu153_site1();
  InsideMap inside;
  OutsideMap outside;
  ExcitationCurves excitation;

  Fixture() {
    MapResolution r = MapResolution::preset_named("ci");
    r.shifts_per_sign = 2;
    r.detuning_step_hz = 500e6;
    r.resonance_offsets_hz = {};
    r.p_points = 5;
    const TwoColorGate gate = TwoColorGate::not_gate();
    inside = generate_inside_map(r, scheme, gate, 1);
    outside = generate_outside_map(r, gate, 1);
    // Flat synthetic curves keep the test quick; the pipeline does not care.
    excitation.resolution = r;
    excitation.scheme = scheme;
    excitation.gate = gate;
    excitation.detuning_grid = {-335e6, 665e6};
    for (int s = 0; s < 2; ++s)
      for (int g = 0; g < 3; ++g) excitation.excited[s][g] = {1e-6 * (s * 9 + 1), 1e-6 * (s * 9 + 1)};
  }
  CampaignInputs inputs() const { return {&cell, &inside, &outside, &excitation, nullptr}; }
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

Scenario small(double c) {
  Scenario s;
  s.c_total = c;
  s.radius_nm = 12.0;
  s.use_windows = false;
  s.trials = 6;
  s.seed = 11;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scenario validation and serialisation") {
  Scenario s;
  s.validate();
  s.G = 5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.G = 1;
  s.Q = 51;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.Q = 3;
  s.c_total = -0.1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.c_total = 0.02;
  const Scenario t = Scenario::from_json(s.to_json());
  CHECK(t.hash() == s.hash());
  CHECK(Scenario::from_json(nlohmann::json{{"trials", 7}}).trials == 7);
}

TEST_CASE("no dopants, no error") {
  Scenario s = small(0.0);
  const CampaignInputs none{&fx().cell, nullptr, nullptr, nullptr, nullptr};
  const TrialResult r = run_trial(s, 0, none);
  CHECK(r.error == 0.0);
  CHECK(r.site1_ions == 0);
}

TEST_CASE("missing inputs are reported") {
  Scenario s = small(0.01);
  s.use_windows = true;
  CHECK_THROWS_AS(run_trial(s, 0, fx().inputs()), MissingInputError);
  s.use_windows = false;
  s.Q = 2;
  s.G = 1;
  CampaignInputs in = fx().inputs();
  in.excitation = nullptr;
  CHECK_THROWS_AS(run_trial(s, 0, in), MissingInputError);
}

TEST_CASE("trials: bounds, determinism, composition") {
  const Scenario s = small(0.01);
  const TrialResult a = run_trial(s, 3, fx().inputs(), true);
  const TrialResult b = run_trial(s, 3, fx().inputs(), true);
  CHECK(a.error == b.error);
  CHECK(a.error >= 0.0);
  CHECK(a.error <= 1.0);
  CHECK(a.inside_ions > 0);
  // Recomposition from the kept contributions reproduces the trial.
  std::vector<ErrorSourceEffect> effects;
  double worst = 0.0;
  for (const auto& c : a.contributions) {
    effects.push_back(c.effect);
    worst = std::max(worst, c.error);
  }
  const BlochVector t = not_target_bloch();
  CHECK(error_from_bloch(qbies_compose(effects, t), t) == doctest::Approx(a.error));
  CHECK(a.top.error == worst);
  // Shrinkage-only lower bound.
  double shrink = 1.0;
  for (const auto& e : effects) shrink *= e.shrinkage;
  CHECK(a.error >= (1.0 - shrink) / 2.0 - 1e-15);
}

TEST_CASE("other qubits add error") {
  Scenario s = small(0.01);
  const TrialResult quiet = run_trial(s, 0, fx().inputs());
  s.Q = 10;
  s.G = 10;
  const TrialResult busy = run_trial(s, 0, fx().inputs());
  CHECK(busy.outside_ions > 0);
  CHECK(busy.error > quiet.error);
}

TEST_CASE("campaign results do not depend on the worker count") {
  const Scenario s = small(0.005);
  CampaignOptions one, three;
  three.workers = 3;
  const CampaignResult a = run_campaign(s, fx().inputs(), one);
  const CampaignResult b = run_campaign(s, fx().inputs(), three);
  REQUIRE(a.trials.size() == 6);
  CHECK(a.sorted_errors == b.sorted_errors);
  CHECK(std::is_sorted(a.sorted_errors.begin(), a.sorted_errors.end()));
  CHECK(a.median_ci_low <= a.stats.median);
  CHECK(a.stats.median <= a.median_ci_high);

  const fs::path dir = fs::temp_directory_path() / "isd_mc_test";
  write_trials_csv(dir / "a.csv", a, "abc");
  write_trials_csv(dir / "b.csv", b, "abc");
  write_ordered_csv(dir / "oa.csv", a, "abc");
  write_ordered_csv(dir / "ob.csv", b, "abc");
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "oa.csv") == slurp(dir / "ob.csv"));
  CHECK(slurp(dir / "a.csv").rfind("# isdsim ", 0) == 0);
  CHECK(campaign_summary_json(a, "abc").dump() == campaign_summary_json(b, "abc").dump());
  fs::remove_all(dir);
}

TEST_CASE("single trial campaign") {
  Scenario s = small(0.005);
  s.trials = 1;
  const CampaignResult r = run_campaign(s, fx().inputs());
  CHECK(r.sorted_errors.size() == 1);
  CHECK(r.stats.median == r.sorted_errors[0]);
}

TEST_CASE("quantiles") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile(v, 0.5) == 3.0);
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 5.0);
  CHECK(quantile(v, 0.25) == doctest::Approx(2.0));
  const Quantiles q = quantiles(v);
  CHECK(q.mean == 3.0);
  CHECK(q.max == 5.0);
}

TEST_CASE("truncation fractions") {
  Scenario s = small(0.02);
  s.trials = 4;
  CampaignOptions o;
  o.keep_contributions = true;
  const CampaignResult r = run_campaign(s, fx().inputs(), o);
  const auto n = truncation_analysis(r.trials, TruncationMode::TopN, {1, 3, 10, 1e9});
  CHECK(n.back().mean_fraction == doctest::Approx(1.0));
  for (std::size_t i = 1; i < n.size(); ++i) CHECK(n[i].mean_fraction >= n[i - 1].mean_fraction - 1e-12);
  const auto radius = truncation_analysis(r.trials, TruncationMode::Radius, {2, 5, s.radius_nm});
  CHECK(radius.back().mean_fraction == doctest::Approx(1.0));
  MESSAGE("top-1 fraction ", n.front().mean_fraction, ", violations ", n.front().monotonicity_violations);
}

TEST_CASE("per-gate increment") {
  const std::vector<PerGatePoint> pts{{0, 0, 1e-6, {}}, {1, 10, 5e-6, {}}, {10, 10, 41e-6, {}}};
  const PerGateIncrement inc = per_gate_increment(pts);
  CHECK(inc.slope == doctest::Approx(4e-7));
  CHECK(inc.intercept == doctest::Approx(1e-6));
  CHECK_FALSE(inc.points[0].per_gate.has_value());
  CHECK(*inc.points[1].per_gate == doctest::Approx(5e-7));
  CHECK_THROWS_AS(per_gate_increment({{1, 10, 1e-6, {}}, {10, 1, 2e-6, {}}}), InsufficientCampaignsError);
}

TEST_CASE("baseline error of a lone qubit") {
  const double b = baseline_error();
  CHECK(b > 1e-4);
  CHECK(b < 5e-4);
  CHECK(baseline_error() == b);
}

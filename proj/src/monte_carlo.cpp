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

#include "isd/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>

#include "isd/csv.hpp"
#include "isd/evolve.hpp"
#include "isd/parallel.hpp"
#include "isd/rng.hpp"
#include "isd/system.hpp"

namespace isd {

void Scenario::validate() const {
  if (!(c_total >= 0.0 && c_total <= 0.05)) throw std::invalid_argument("c_total must lie in [0, 0.05]");
  if (!(radius_nm > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!(nu_init >= 0.0)) throw std::invalid_argument("nu_init must be non-negative");
  if (Q < 0 || Q > 50) throw std::invalid_argument("Q must lie in 0..50");
  if (G < 0) throw std::invalid_argument("G must be non-negative");
  if (G != 0 && G != 1 && G != 10) throw std::invalid_argument("G must be 0, 1 or 10");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (!(site1_fraction >= 0.0 && site1_fraction <= 1.0)) {
    throw std::invalid_argument("site1_fraction must lie in [0, 1]");
  }
}

nlohmann::json Scenario::to_json() const {
  return {{"c_total", c_total}, {"radius_nm", radius_nm}, {"use_windows", use_windows},
          {"nu_init", nu_init}, {"Q", Q},                 {"G", G},
          {"trials", trials},   {"seed", seed},           {"site1_fraction", site1_fraction}};
}

Scenario Scenario::from_json(const nlohmann::json& j, Scenario s) {
  s.c_total = j.value("c_total", s.c_total);
  s.radius_nm = j.value("radius_nm", s.radius_nm);
  s.use_windows = j.value("use_windows", s.use_windows);
  s.nu_init = j.value("nu_init", s.nu_init);
  s.Q = j.value("Q", s.Q);
  s.G = j.value("G", s.G);
  s.trials = j.value("trials", s.trials);
  s.seed = j.value("seed", s.seed);
  s.site1_fraction = j.value("site1_fraction", s.site1_fraction);
  return s;
}

std::uint64_t Scenario::hash() const { return fnv1a(to_json().dump()); }

TrialResult run_trial(const Scenario& scenario, std::uint64_t trial, const CampaignInputs& in,
                      bool keep_contributions) {
  scenario.validate();
  if (in.cell == nullptr) throw MissingInputError("run_trial: no unit cell");
  if (scenario.use_windows) {
    if (in.profile == nullptr) throw MissingInputError("run_trial: windows need a population profile");
    if (in.profile->nu_init != scenario.nu_init) {
      throw MissingInputError("run_trial: population profile was burnt for a different nu_init");
    }
  }
  const bool others = scenario.Q > 0 && scenario.G > 0;
  if (scenario.c_total > 0.0) {
    if (in.inside == nullptr) throw MissingInputError("run_trial: no inside map");
    if (others && (in.outside == nullptr || in.excitation == nullptr)) {
      throw MissingInputError("run_trial: gates on other qubits need the outside map and excitation curves");
    }
  }

  TrialResult r;
  r.trial = trial;
  r.seed = scenario.seed;
  IonSurrounding s = dope_sphere(*in.cell, scenario.c_total, scenario.seed, trial,
                                 {scenario.radius_nm, scenario.site1_fraction});
  assign_frequencies(s);
  const PopulationProfile* profile = scenario.use_windows ? in.profile : nullptr;
  assign_initial_states(s, profile);
  r.site1_ions = s.neighbors.size();
  r.site2_ions = s.site2_dopants;

  const BlochVector target = not_target_bloch();
  std::vector<ErrorSourceEffect> effects;
  for (const DopedIon& ion : s.neighbors) {
    const int q = ion.channel.qubit;
    IonContribution c;
    c.channel = q;
    c.offset_hz = ion.channel.offset_hz;
    c.shift_hz = ion.shift_to_qubit_hz;
    c.distance_nm = ion.distance_nm;
    c.initial_state = ion.initial_state;
    if (q == 0) {
      ++r.inside_ions;
      if (std::abs(c.shift_hz) > InsideMap::kMaxShift) ++r.exact_fallbacks;
      c.effect = in.inside->query(c.shift_hz, c.offset_hz, c.initial_state);
    } else if (others && q >= 1 && q <= scenario.Q) {
      ++r.outside_ions;
      c.excited_population = in.excitation->excited_population(scenario.G, c.offset_hz, profile);
      if (c.excited_population <= 0.0) continue;
      c.effect = in.outside->query(c.shift_hz, c.excited_population);
    } else {
      continue;
    }
    if (c.effect.is_identity()) continue;
    c.error = error_from_bloch(c.effect.apply(target), target);
    if (c.error > r.top.error) r.top = c;
    effects.push_back(c.effect);
    if (keep_contributions) r.contributions.push_back(c);
  }
  r.error = std::clamp(error_from_bloch(qbies_compose(effects, target), target), 0.0, 1.0);
  return r;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double f = pos - static_cast<double>(i);
  return sorted[i] + f * (sorted[i + 1] - sorted[i]);
}

Quantiles quantiles(const std::vector<double>& sorted) {
  Quantiles s;
  s.min = sorted.front();
  s.p10 = quantile(sorted, 0.10);
  s.p25 = quantile(sorted, 0.25);
  s.median = quantile(sorted, 0.5);
  s.p75 = quantile(sorted, 0.75);
  s.p90 = quantile(sorted, 0.90);
  s.p99 = quantile(sorted, 0.99);
  s.max = sorted.back();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  return s;
}

double baseline_error(const Tolerance& tol) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find({tol.rtol, tol.atol});
    if (it != cache.end()) return it->second;
  }
  SystemSpec spec;
  spec.ions = {IonModel::six_level(0.0, DriveMode::All)};
  const LocalLevels q = local_levels(spec.ions[0], spec.scheme);
  const StateVector plus = qubit_plus_i(q, 6);
  const DensityMatrix out = apply_gate(plus * plus.adjoint(), spec, TwoColorGate::not_gate(),
                                       LindbladParams::europium(), tol);
  const QubitState r = reduce_to_qubit(out, {6}, q.zero, q.one);
  const double e = error_from_bloch(bloch_vector(r.rho), not_target_bloch());
  std::lock_guard lock(mu);
  cache[{tol.rtol, tol.atol}] = e;
  return e;
}

CampaignResult run_campaign(const Scenario& scenario, const CampaignInputs& inputs,
                            const CampaignOptions& options) {
  scenario.validate();
  CampaignResult out;
  out.scenario = scenario;
  out.trials.resize(static_cast<std::size_t>(scenario.trials));
  parallel_for(out.trials.size(), options.workers, [&](std::size_t i) {
    out.trials[i] = run_trial(scenario, i, inputs, options.keep_contributions);
  });
  for (const auto& t : out.trials) out.sorted_errors.push_back(t.error);
  std::sort(out.sorted_errors.begin(), out.sorted_errors.end());
  out.stats = quantiles(out.sorted_errors);
  out.baseline = baseline_error();
  for (double f : options.threshold_factors) {
    const double limit = f * out.baseline;
    const auto n = std::count_if(out.sorted_errors.begin(), out.sorted_errors.end(),
                                 [&](double e) { return e > limit; });
    out.exceed_fractions.emplace_back(f, static_cast<double>(n) / static_cast<double>(scenario.trials));
  }
  if (options.bootstrap_resamples > 0) {
    CounterRng rng(scenario.seed, 0, Stream::Bootstrap);
    std::vector<double> medians, sample(out.sorted_errors.size());
    for (int b = 0; b < options.bootstrap_resamples; ++b) {
      for (auto& x : sample) x = out.sorted_errors[rng.below(out.sorted_errors.size())];
      std::sort(sample.begin(), sample.end());
      medians.push_back(quantile(sample, 0.5));
    }
    std::sort(medians.begin(), medians.end());
    out.median_ci_low = quantile(medians, 0.025);
    out.median_ci_high = quantile(medians, 0.975);
  } else {
    out.median_ci_low = out.median_ci_high = out.stats.median;
  }
  return out;
}

std::vector<TruncationPoint> truncation_analysis(const std::vector<TrialResult>& trials,
                                                 TruncationMode mode,
                                                 const std::vector<double>& parameters) {
  const BlochVector target = not_target_bloch();
  std::vector<TruncationPoint> out;
  for (double p : parameters) out.push_back({p, 0.0, 0});
  if (trials.empty()) return out;
  for (const auto& t : trials) {
    if (t.contributions.empty() && t.error > 0.0) {
      throw std::invalid_argument("truncation_analysis: trials were run without contributions");
    }
    std::vector<ErrorSourceEffect> effects;
    for (const auto& c : t.contributions) effects.push_back(c.effect);
    const double full = error_from_bloch(qbies_compose(effects, target), target);
    std::vector<std::size_t> order(effects.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return t.contributions[a].error > t.contributions[b].error;
    });
    double previous = -1.0;
    for (std::size_t k = 0; k < parameters.size(); ++k) {
      std::vector<std::size_t> subset;
      if (mode == TruncationMode::TopN) {
        const auto n = static_cast<std::size_t>(std::max(0.0, parameters[k]));
        subset.assign(order.begin(), order.begin() + std::min(n, order.size()));
        std::sort(subset.begin(), subset.end());
      } else {
        for (std::size_t i = 0; i < effects.size(); ++i)
          if (t.contributions[i].distance_nm <= parameters[k]) subset.push_back(i);
      }
      double fraction = 1.0;
      if (full > 0.0) {
        fraction = error_from_bloch(qbies_compose_subset(effects, subset, target), target) / full;
      }
      out[k].mean_fraction += fraction / static_cast<double>(trials.size());
      if (fraction < previous - 1e-12) ++out[k].monotonicity_violations;
      previous = fraction;
    }
  }
  return out;
}

PerGateIncrement per_gate_increment(const std::vector<PerGatePoint>& campaigns) {
  PerGateIncrement r;
  std::vector<int> distinct;
  for (auto p : campaigns) {
    const int gq = p.G * p.Q;
    if (gq > 0) p.per_gate = p.median / gq;
    r.points.push_back(p);
    if (std::find(distinct.begin(), distinct.end(), gq) == distinct.end()) distinct.push_back(gq);
  }
  if (distinct.size() < 2) {
    throw InsufficientCampaignsError("per_gate_increment: need campaigns at two or more distinct G*Q");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(campaigns.size());
  for (const auto& p : campaigns) {
    const double x = p.G * p.Q;
    sx += x;
    sy += p.median;
    sxx += x * x;
    sxy += x * p.median;
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.intercept = (sy - r.slope * sx) / n;
  return r;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_trials_csv(const std::filesystem::path& path, const CampaignResult& r,
                      const std::string& config_hash) {
  auto out = open_output(path);
  out << "# isdsim " << ISDSIM_VERSION << " config_hash=" << config_hash << "\n";
  out << "trial,seed,error,site1_ions,inside_ions,outside_ions,site2_ions,exact_fallbacks,"
         "top_error,top_channel,top_offset_hz,top_shift_hz,top_distance_nm\n";
  for (const auto& t : r.trials) {
    out << t.trial << ',' << t.seed << ',' << csv_number(t.error) << ',' << t.site1_ions << ','
        << t.inside_ions << ',' << t.outside_ions << ',' << t.site2_ions << ',' << t.exact_fallbacks
        << ',' << csv_number(t.top.error) << ',' << t.top.channel << ',' << csv_number(t.top.offset_hz)
        << ',' << csv_number(t.top.shift_hz) << ',' << csv_number(t.top.distance_nm) << '\n';
  }
}

void write_ordered_csv(const std::filesystem::path& path, const CampaignResult& r,
                       const std::string& config_hash) {
  auto out = open_output(path);
  out << "# isdsim " << ISDSIM_VERSION << " config_hash=" << config_hash << "\n";
  out << "rank,fraction,error\n";
  const auto n = r.sorted_errors.size();
  for (std::size_t i = 0; i < n; ++i) {
    out << i + 1 << ',' << csv_number(static_cast<double>(i + 1) / static_cast<double>(n)) << ','
        << csv_number(r.sorted_errors[i]) << '\n';
  }
}

nlohmann::json campaign_summary_json(const CampaignResult& r, const std::string& config_hash) {
  nlohmann::json j;
  j["tool_version"] = ISDSIM_VERSION;
  j["config_hash"] = config_hash;
  j["scenario"] = r.scenario.to_json();
  j["trials"] = r.trials.size();
  const auto& s = r.stats;
  j["quantiles"] = {{"min", s.min}, {"p10", s.p10},       {"p25", s.p25}, {"median", s.median},
                    {"p75", s.p75}, {"p90", s.p90},       {"p99", s.p99}, {"max", s.max},
                    {"mean", s.mean}};
  j["median_ci95"] = {r.median_ci_low, r.median_ci_high};
  j["baseline_error"] = r.baseline;
  for (const auto& [f, frac] : r.exceed_fractions) {
    j["exceed_fractions"].push_back({{"factor_of_baseline", f}, {"fraction", frac}});
  }
  return j;
}

}  // namespace isd

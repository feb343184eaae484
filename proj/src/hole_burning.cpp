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

#include "isd/hole_burning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace isd {

void BurnPulse::validate() const {
  if (!(nu_scan >= 0.0)) throw std::invalid_argument("burn pulse " + name + ": negative scan width");
  if (!(nu_slope > 0.0)) throw std::invalid_argument("burn pulse " + name + ": slope must be positive");
  if (!(design_efficiency > 0.0 && design_efficiency <= 1.0)) {
    throw std::invalid_argument("burn pulse " + name + ": efficiency must lie in (0, 1]");
  }
  if (design_ground < 0 || design_ground > 2 || design_excited < 0 || design_excited > 2) {
    throw std::invalid_argument("burn pulse " + name + ": unknown design transition");
  }
}

double BurnPulse::efficiency(int ground, int excited, const LevelScheme& scheme) const {
  if (ground < 0 || ground > 2 || excited < 0 || excited > 2) {
    throw std::invalid_argument("burn pulse: unknown transition");
  }
  const double ratio = scheme.strength(ground, excited) / scheme.strength(design_ground, design_excited);
  return std::min(1.0, design_efficiency * std::sqrt(ratio));
}

namespace {

// Beyond this many slopes outside the scan range the tanh plateau is below
// 1e-34 and the Lorentzian floor dominates.
constexpr double kPlateauReach = 40.0;

double plateau(double x, const BurnPulse& p) {
  const double lo = p.nu_c - 0.5 * p.nu_scan, hi = p.nu_c + 0.5 * p.nu_scan;
  if (x < lo - kPlateauReach * p.nu_slope || x > hi + kPlateauReach * p.nu_slope) return 0.0;
  return 0.5 * (std::tanh((x - lo) / p.nu_slope) - std::tanh((x - hi) / p.nu_slope));
}

double lorentz_floor(double x, const BurnPulse& p, double gamma) {
  const double d = x - p.nu_c;
  return gamma * gamma / (d * d + gamma * gamma);
}

}  // namespace

double transfer_probability(double nu, const BurnPulse& pulse, int ground, int excited,
                            const LevelScheme& scheme, double t2) {
  const double eps = pulse.efficiency(ground, excited, scheme);
  const double gamma = 1.0 / t2;
  const double p = eps * std::max(plateau(nu, pulse), lorentz_floor(nu, pulse, gamma));
  return std::clamp(p, 0.0, 1.0);
}

std::array<BurnPulse, 5> standard_burn_pulses(double nu_init) {
  if (nu_init < 0.0) throw std::invalid_argument("nu_init must not be negative");
  // Ground labels: 0 = 1/2g (|0>), 1 = 3/2g (|1>), 2 = 5/2g (|aux>).
  // Excited labels: 0 = 1/2e, 1 = 3/2e, 2 = 5/2e (|e>).
  // A zero-width initialization pulse still needs a finite slope; it is never
  // applied to the ensemble in that case.
  const double init_slope = nu_init > 0.0 ? nu_init / 4.0 : 1.0;
  return {{
      {"window |0>", 0.0, 17.0e6, 250e3, 0, 2, 0.60},
      {"window |1>", 79.35e6, 49.3e6, 250e3, 0, 2, 0.60},
      {"clear |aux>", -50.8e6, 1.0e6, 250e3, 2, 1, 0.60},
      {"qubit excite", -50.8e6, nu_init, init_slope, 2, 1, 0.999},
      {"qubit deexcite", -260.0e6, 10.0 * nu_init, 10.0 * init_slope, 0, 1, 0.999},
  }};
}

std::vector<BurnStep> standard_burn_sequence() {
  return {
      {"clear windows and |aux>", {0, 1, 2}, 20, true},
      {"clear windows", {0, 1}, 500, true},
      {"excite qubit", {3}, 1, false},
      {"deexcite qubit", {4}, 1, false},
      {"clear second window", {1}, 100, true},
  };
}

PopulationProfile::PopulationProfile(std::vector<double> grid_hz, std::vector<Populations> populations)
    : grid_(std::move(grid_hz)), pop_(std::move(populations)) {
  if (grid_.size() != pop_.size() || grid_.size() < 2) {
    throw std::invalid_argument("population profile: grid and populations must match, size >= 2");
  }
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1])) throw std::invalid_argument("population profile: grid not increasing");
  }
}

PopulationProfile PopulationProfile::uniform(double step, double refine_half_width) {
  if (!(step > 0.0)) throw std::invalid_argument("population profile: step must be positive");
  std::vector<double> grid;
  const auto n = static_cast<long>(std::llround((kHigh - kLow) / step));
  for (long i = 0; i <= n; ++i) grid.push_back(kLow + static_cast<double>(i) * (kHigh - kLow) / n);
  if (refine_half_width > 0.0) {
    const double fine = 1e3;
    const auto m = static_cast<long>(std::ceil(refine_half_width / fine));
    for (long i = -m; i <= m; ++i) grid.push_back(static_cast<double>(i) * fine);
    std::sort(grid.begin(), grid.end());
    // Merge points closer than 1 Hz.
    std::vector<double> merged;
    for (double g : grid) {
      if (merged.empty() || g - merged.back() > 1.0) merged.push_back(g);
    }
    grid.swap(merged);
  }
  const Populations start{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0};
  return PopulationProfile(grid, std::vector<Populations>(grid.size(), start));
}

PopulationProfile::Populations PopulationProfile::at(double nu) const {
  // Periodic fold into [kLow, kLow + kPeriod).
  double x = std::fmod(nu - kLow, kPeriod);
  if (x < 0.0) x += kPeriod;
  x += kLow;
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  if (it == grid_.begin()) return pop_.front();
  if (it == grid_.end()) return pop_.back();
  const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - grid_[lo]) / (grid_[hi] - grid_[lo]);
  Populations out;
  for (int k = 0; k < 6; ++k) out[k] = (1.0 - w) * pop_[lo][k] + w * pop_[hi][k];
  return out;
}

std::array<double, 3> PopulationProfile::ground_probabilities(double nu) const {
  const Populations p = at(nu);
  const double total = std::max(0.0, p[0]) + std::max(0.0, p[1]) + std::max(0.0, p[2]);
  if (!(total > 0.0)) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return {std::max(0.0, p[0]) / total, std::max(0.0, p[1]) / total, std::max(0.0, p[2]) / total};
}

double PopulationProfile::conservation_error() const {
  double worst = 0.0;
  for (const auto& p : pop_) {
    double s = 0.0;
    for (double v : p) s += v;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

void PopulationProfile::validate(double tol) const {
  if (conservation_error() > tol) throw std::runtime_error("population profile: populations do not sum to 1");
  for (const auto& p : pop_) {
    for (double v : p) {
      if (v < -tol) throw std::runtime_error("population profile: negative population");
    }
  }
}

void PopulationProfile::save_csv(const std::filesystem::path& path, const std::string& header_comment) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (!header_comment.empty()) {
    std::istringstream lines(header_comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", nu_init);
  out << "# nu_init_hz=" << buf;
  std::snprintf(buf, sizeof buf, "%.17g", qubit_zero_population);
  out << " qubit_zero_population=" << buf << '\n';
  out << "detuning_hz,p_g0,p_g1,p_g2,p_e0,p_e1,p_e2\n";
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", grid_[i]);
    out << buf;
    for (double v : pop_[i]) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

PopulationProfile PopulationProfile::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile " + path.string());
  std::vector<double> grid;
  std::vector<Populations> pops;
  double nu_init = 0.0, qzero = 0.0;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (const auto k = line.find("nu_init_hz="); k != std::string::npos) nu_init = std::stod(line.substr(k + 11));
      if (const auto k = line.find("qubit_zero_population="); k != std::string::npos) {
        qzero = std::stod(line.substr(k + 22));
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("detuning_hz", 0) != 0) throw std::runtime_error("profile csv: unexpected header");
      continue;
    }
    std::istringstream fields(line);
    std::string cell;
    std::array<double, 7> row{};
    for (int k = 0; k < 7; ++k) {
      if (!std::getline(fields, cell, ',')) throw std::runtime_error("profile csv: short row");
      row[k] = std::stod(cell);
    }
    grid.push_back(row[0]);
    pops.push_back({row[1], row[2], row[3], row[4], row[5], row[6]});
  }
  PopulationProfile p(std::move(grid), std::move(pops));
  p.nu_init = nu_init;
  p.qubit_zero_population = qzero;
  return p;
}

std::uint64_t PopulationProfile::hash() const {
  std::uint64_t h = fnv1a(std::string_view(reinterpret_cast<const char*>(grid_.data()),
                                           grid_.size() * sizeof(double)));
  return fnv1a(std::string_view(reinterpret_cast<const char*>(pop_.data()), pop_.size() * sizeof(Populations)), h);
}

void decay_to_ground(PopulationProfile::Populations& p, const LevelScheme& scheme) {
  for (int e = 0; e < 3; ++e) {
    const double n = p[3 + e];
    if (n == 0.0) continue;
    for (int g = 0; g < 3; ++g) p[g] += n * scheme.branching(g, e);
    p[3 + e] = 0.0;
  }
}

namespace {

// Transfer probability of one pulse at every grid point and transition, with
// the pulses of all listed qubits folded together. Independent symmetric
// transfers on one transition compose exactly: the population difference is
// multiplied by prod(1 - 2 P_q).
std::vector<std::array<double, 9>> pulse_table(const std::vector<double>& grid, const BurnPulse& pulse,
                                                const LevelScheme& scheme,
                                                const std::vector<double>& offsets, double t2) {
  std::vector<std::array<double, 9>> table(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int g = 0; g < 3; ++g) {
      for (int e = 0; e < 3; ++e) {
        const double nu = grid[i] + scheme.transition_hz(g, e);
        double factor = 1.0;
        for (double off : offsets) {
          factor *= 1.0 - 2.0 * transfer_probability(nu - off, pulse, g, e, scheme, t2);
        }
        table[i][g * 3 + e] = 0.5 * (1.0 - factor);
      }
    }
  }
  return table;
}

void apply_table(PopulationProfile& profile, const std::vector<std::array<double, 9>>& table,
                 const LevelScheme& scheme, bool decay) {
  auto& pops = profile.populations();
  for (std::size_t i = 0; i < pops.size(); ++i) {
    auto& p = pops[i];
    for (int g = 0; g < 3; ++g) {
      for (int e = 0; e < 3; ++e) {
        const double prob = table[i][g * 3 + e];
        if (prob == 0.0) continue;
        const double moved = prob * (p[g] - p[3 + e]);
        p[g] -= moved;
        p[3 + e] += moved;
      }
    }
    if (decay) decay_to_ground(p, scheme);
  }
}

}  // namespace

void apply_pulse(PopulationProfile& profile, const BurnPulse& pulse, const LevelScheme& scheme,
                 bool decay, const std::vector<double>& qubit_offsets_hz) {
  pulse.validate();
  apply_table(profile, pulse_table(profile.grid(), pulse, scheme, qubit_offsets_hz, 2.6e-3), scheme, decay);
  for (const auto& p : profile.populations()) {
    for (double v : p) {
      if (v < -1e-9) throw std::runtime_error("apply_pulse: population became negative");
    }
  }
}

double qubit_offset_hz(int q) {
  if (q < 0) throw std::invalid_argument("qubit index must not be negative");
  if (q == 0) return 0.0;
  return q % 2 ? 1e9 * ((q + 1) / 2) : -1e9 * (q / 2);
}

PopulationProfile run_scheme(const BurnConfig& config, const LevelScheme& scheme) {
  if (config.nu_init < 0.0) throw std::invalid_argument("run_scheme: nu_init must not be negative");
  if (config.qubit_count < 1) throw std::invalid_argument("run_scheme: need at least one qubit");
  const auto pulses = standard_burn_pulses(config.nu_init);
  const bool init_pulses = config.nu_init > 0.0;
  PopulationProfile profile = PopulationProfile::uniform(config.grid_step, init_pulses ? 2.0 * config.nu_init : 0.0);
  profile.nu_init = config.nu_init;

  std::vector<double> offsets;
  for (int q = 0; q < config.qubit_count; ++q) offsets.push_back(qubit_offset_hz(q));

  std::array<std::vector<std::array<double, 9>>, 5> tables;
  for (int k = 0; k < 5; ++k) {
    if (k >= 3 && !init_pulses) continue;
    tables[k] = pulse_table(profile.grid(), pulses[k], scheme, offsets, config.t2);
  }

  // The qubit ion itself (detuning 0), tracked on its own.
  PopulationProfile::Populations qubit{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0};
  auto burn_qubit = [&](int k, bool decay, bool forced) {
    const auto& p = pulses[k];
    for (int g = 0; g < 3; ++g) {
      for (int e = 0; e < 3; ++e) {
        double prob;
        if (forced) {
          prob = (g == p.design_ground && e == p.design_excited) ? p.design_efficiency : 0.0;
        } else {
          prob = transfer_probability(scheme.transition_hz(g, e), p, g, e, scheme, config.t2);
        }
        const double moved = prob * (qubit[g] - qubit[3 + e]);
        qubit[g] -= moved;
        qubit[3 + e] += moved;
      }
    }
    if (decay) decay_to_ground(qubit, scheme);
  };

  for (const auto& step : standard_burn_sequence()) {
    const bool init_step = step.pulses.front() >= 3;
    const int reps = std::max(1, static_cast<int>(std::lround(step.repetitions * config.repetition_scale)));
    for (int r = 0; r < (init_step ? step.repetitions : reps); ++r) {
      for (int k : step.pulses) {
        if (k >= 3 && !init_pulses) {
          // Only the qubit ion is transferred.
          burn_qubit(k, step.decay, true);
          continue;
        }
        apply_table(profile, tables[k], scheme, step.decay);
        burn_qubit(k, step.decay, k >= 3);
      }
    }
  }
  profile.qubit_zero_population = qubit[scheme.roles.zero];
  profile.validate();
  return profile;
}

WindowEdges compute_max_windows(const LevelScheme& scheme, double step_hz) {
  const double f0 = scheme.color_hz(0), f1 = scheme.color_hz(1);
  double lo0 = -std::numeric_limits<double>::infinity(), hi0 = std::numeric_limits<double>::infinity();
  double lo1 = lo0, hi1 = hi0;
  const double span = 1.0e9;
  const auto n = static_cast<long>(std::llround(2.0 * span / step_hz));
  for (long i = 0; i <= n; ++i) {
    const double delta = -span + static_cast<double>(i) * step_hz;
    int best = 0;
    double best_gap = -1.0;
    for (int g = 0; g < 3; ++g) {
      double gap = std::numeric_limits<double>::infinity();
      for (int e = 0; e < 3; ++e) {
        const double nu = delta + scheme.transition_hz(g, e);
        gap = std::min({gap, std::abs(nu - f0), std::abs(nu - f1)});
      }
      if (gap > best_gap) {
        best_gap = gap;
        best = g;
      }
    }
    for (int e = 0; e < 3; ++e) {
      const double nu = delta + scheme.transition_hz(best, e);
      const double d0 = nu - f0, d1 = nu - f1;
      if (d0 >= 0.0) hi0 = std::min(hi0, d0); else lo0 = std::max(lo0, d0);
      if (d1 >= 0.0) hi1 = std::min(hi1, d1); else lo1 = std::max(lo1, d1);
    }
  }
  return {lo0, hi0, lo1, hi1};
}

double absorption(const PopulationProfile& profile, const LevelScheme& scheme, double nu) {
  double a = 0.0;
  for (int g = 0; g < 3; ++g) {
    for (int e = 0; e < 3; ++e) {
      const auto p = profile.at(nu - scheme.transition_hz(g, e));
      a += scheme.strength(g, e) * (p[g] - p[3 + e]);
    }
  }
  return a;
}

}  // namespace isd

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

// isdsim: hole burning, lookup-table generation, Monte Carlo campaigns and
// QBies validation from one command line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "isd/artifacts.hpp"
#include "isd/csv.hpp"
#include "isd/lattice.hpp"
#include "isd/monte_carlo.hpp"
#include "isd/parallel.hpp"
#include "isd/run_config.hpp"
#include "isd/validation.hpp"

namespace fs = std::filesystem;
using namespace isd;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMissing = 3;
constexpr int kExitNumerical = 4;

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> preset, cache_dir, output_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> c_total, radius_nm, nu_init;
  std::optional<bool> windows;
  std::optional<int> Q, G, trials;
  std::optional<std::string> mode, study;
  std::optional<int> ions, cases;
  std::optional<std::string> what;
  std::optional<double> shift;
};

RunConfig merge(const std::string& sub, const Overrides& o) {
  RunConfig c;
  if (o.config) c = RunConfig::load(*o.config, c);
  // The environment names the cache unless a flag does.
  if (const char* env = std::getenv("ISDSIM_CACHE_DIR"); env && *env) c.cache_dir = env;
  c.subcommand = sub;
  if (o.preset) c.preset = *o.preset;
  if (o.cache_dir) c.cache_dir = *o.cache_dir;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.workers) c.workers = *o.workers;
  if (o.seed) c.scenario.seed = *o.seed;
  if (o.c_total) c.scenario.c_total = *o.c_total;
  if (o.radius_nm) c.scenario.radius_nm = *o.radius_nm;
  if (o.nu_init) c.scenario.nu_init = *o.nu_init;
  if (o.windows) c.scenario.use_windows = *o.windows;
  if (o.Q) c.scenario.Q = *o.Q;
  if (o.G) c.scenario.G = *o.G;
  if (o.trials) c.scenario.trials = *o.trials;
  if (o.mode) c.mode = *o.mode;
  if (o.study) c.study = *o.study;
  if (o.ions) c.ions = *o.ions;
  if (o.cases) c.cases = *o.cases;
  if (o.what) c.dump_what = *o.what;
  if (o.shift) c.dump_shift_hz = *o.shift;
  if (c.scenario.nu_init < 0.0) throw std::invalid_argument("nu_init must be non-negative");
  c.validate();
  return c;
}

void say(const std::string& s) { std::cerr << "isdsim: " << s << '\n'; }

std::string banner(const RunConfig& c) {
  return std::string("# isdsim ") + ISDSIM_VERSION + " config_hash=" + c.hash();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

ArtifactCache cache_for(const RunConfig& c) {
  ArtifactCache cache(c.cache_dir);
  cache.log = say;
  return cache;
}

const LevelScheme& scheme() {
  static const LevelScheme s = LevelScheme::eu153_site1();
  return s;
}

int cmd_burn(const RunConfig& c) {
  ArtifactCache cache = cache_for(c);
  const PopulationProfile p = cache.profile(c.burn_config(), scheme(), true);
  const fs::path out = c.output_dir / "profile.csv";
  fs::create_directories(c.output_dir);
  p.save_csv(out, banner(c).substr(2));
  say("wrote " + out.string());
  return 0;
}

void dump_inside(const RunConfig& c, const InsideMap& m, const fs::path& path) {
  auto out = open_output(path);
  out << banner(c) << " shift_hz=" << exact_number(c.dump_shift_hz) << '\n';
  out << "detuning_hz,state,u,v,w,angle_rad,shrinkage,error\n";
  const BlochVector target = not_target_bloch();
  for (double d : m.detuning_grid)
    for (int s = 0; s < 3; ++s) {
      const ErrorSourceEffect e = m.query(c.dump_shift_hz, d, s);
      const BlochVector a = e.apply(target);
      out << csv_number(d) << ',' << s << ',' << csv_number(a[0]) << ',' << csv_number(a[1]) << ','
          << csv_number(a[2]) << ',' << csv_number(e.angle) << ',' << csv_number(e.shrinkage) << ','
          << csv_number(error_from_bloch(a, target)) << '\n';
    }
}

void dump_outside(const RunConfig& c, const OutsideMap& m, const fs::path& path) {
  auto out = open_output(path);
  out << banner(c) << " shift_hz=" << exact_number(c.dump_shift_hz) << '\n';
  out << "p,u,v,w,angle_rad,shrinkage,error\n";
  const BlochVector target = not_target_bloch();
  for (double p : m.p_grid) {
    const ErrorSourceEffect e = m.query(c.dump_shift_hz, p);
    const BlochVector a = e.apply(target);
    out << csv_number(p) << ',' << csv_number(a[0]) << ',' << csv_number(a[1]) << ',' << csv_number(a[2])
        << ',' << csv_number(e.angle) << ',' << csv_number(e.shrinkage) << ','
        << csv_number(error_from_bloch(a, target)) << '\n';
  }
}

void dump_excitation(const RunConfig& c, const ExcitationCurves& m, const PopulationProfile* profile,
                     const fs::path& path) {
  auto out = open_output(path);
  out << banner(c) << " weighting=" << (profile ? "profile" : "uniform") << '\n';
  out << "detuning_hz,g1_s0,g1_s1,g1_s2,g10_s0,g10_s1,g10_s2,g1_weighted,g10_weighted\n";
  for (std::size_t i = 0; i < m.detuning_grid.size(); ++i) {
    const double d = m.detuning_grid[i];
    out << csv_number(d);
    for (int slot = 0; slot < 2; ++slot)
      for (int g = 0; g < 3; ++g) out << ',' << csv_number(m.excited[slot][g][i]);
    out << ',' << csv_number(m.excited_population(1, d, profile)) << ','
        << csv_number(m.excited_population(10, d, profile)) << '\n';
  }
}

int cmd_genmaps(const RunConfig& c, bool dump_slice) {
  ArtifactCache cache = cache_for(c);
  const MapResolution res = c.resolution();
  const TwoColorGate gate = TwoColorGate::not_gate();
  const int w = resolve_workers(c.workers);
  const InsideMap in = cache.inside(res, scheme(), gate, w, true);
  cache.outside(res, gate, w, true);
  cache.excitation(res, scheme(), gate, w, true);
  if (dump_slice) {
    const fs::path out = c.output_dir / "inside_slice.csv";
    dump_inside(c, in, out);
    say("wrote " + out.string());
  }
  return 0;
}

struct LoadedInputs {
  UnitCell cell = UnitCell::y2sio5();
  std::optional<InsideMap> inside;
  std::optional<OutsideMap> outside;
  std::optional<ExcitationCurves> excitation;
  std::optional<PopulationProfile> profile;

  CampaignInputs view() const {
    return {&cell, inside ? &*inside : nullptr, outside ? &*outside : nullptr,
            excitation ? &*excitation : nullptr, profile ? &*profile : nullptr};
  }
};

LoadedInputs load_inputs(const RunConfig& c, bool need_outside) {
  ArtifactCache cache = cache_for(c);
  const MapResolution res = c.resolution();
  const TwoColorGate gate = TwoColorGate::not_gate();
  LoadedInputs in;
  in.inside = cache.inside(res, scheme(), gate, 1, false);
  if (need_outside) {
    in.outside = cache.outside(res, gate, 1, false);
    in.excitation = cache.excitation(res, scheme(), gate, 1, false);
  }
  if (c.scenario.use_windows) in.profile = cache.profile(c.burn_config(), scheme(), false);
  return in;
}

int cmd_campaign(const RunConfig& c) {
  CampaignOptions opt;
  opt.workers = resolve_workers(c.workers);
  const std::string h = c.hash();
  fs::create_directories(c.output_dir);

  if (c.mode == "per-gate") {
    bool outside = false;
    for (const auto& [g, q] : c.per_gate_runs) outside |= g > 0 && q > 0;
    const LoadedInputs in = load_inputs(c, outside);
    std::vector<PerGatePoint> points;
    for (const auto& [g, q] : c.per_gate_runs) {
      Scenario s = c.scenario;
      s.G = g;
      s.Q = q;
      say("campaign G=" + std::to_string(g) + " Q=" + std::to_string(q));
      const CampaignResult r = run_campaign(s, in.view(), opt);
      write_ordered_csv(c.output_dir / ("ordered_G" + std::to_string(g) + "_Q" + std::to_string(q) + ".csv"), r, h);
      points.push_back({g, q, r.stats.median, {}});
    }
    const PerGateIncrement inc = per_gate_increment(points);
    auto out = open_output(c.output_dir / "per_gate.csv");
    out << banner(c) << '\n' << "G,Q,GQ,median_error,error_per_gate\n";
    for (const auto& p : inc.points) {
      out << p.G << ',' << p.Q << ',' << p.G * p.Q << ',' << csv_number(p.median) << ','
          << (p.per_gate ? csv_number(*p.per_gate) : std::string("undefined")) << '\n';
    }
    nlohmann::json j{{"tool_version", ISDSIM_VERSION}, {"config_hash", h}, {"scenario", c.scenario.to_json()},
                     {"slope_per_gate", inc.slope}, {"intercept", inc.intercept}};
    write_json(c.output_dir / "per_gate_summary.json", j);
    std::printf("per-gate slope %.6e (intercept %.6e)\n", inc.slope, inc.intercept);
    return 0;
  }

  const LoadedInputs in = load_inputs(c, c.scenario.Q > 0 && c.scenario.G > 0);
  opt.keep_contributions = c.mode == "truncation";
  const CampaignResult r = run_campaign(c.scenario, in.view(), opt);
  write_trials_csv(c.output_dir / "trials.csv", r, h);
  write_ordered_csv(c.output_dir / "ordered.csv", r, h);
  write_json(c.output_dir / "summary.json", campaign_summary_json(r, h));
  if (c.mode == "truncation") {
    auto out = open_output(c.output_dir / "truncation.csv");
    out << banner(c) << '\n' << "mode,parameter,mean_fraction,monotonicity_violations\n";
    const std::pair<TruncationMode, const std::vector<double>*> modes[] = {
        {TruncationMode::TopN, &c.truncation_n}, {TruncationMode::Radius, &c.truncation_r_nm}};
    for (const auto& [mode, params] : modes) {
      for (const auto& t : truncation_analysis(r.trials, mode, *params)) {
        out << (mode == TruncationMode::TopN ? "top_n" : "radius_nm") << ',' << csv_number(t.parameter) << ','
            << csv_number(t.mean_fraction) << ',' << t.monotonicity_violations << '\n';
      }
    }
  }
  std::printf("median %.6e  p90 %.6e  baseline %.6e  (%zu trials)\n", r.stats.median, r.stats.p90, r.baseline,
              r.trials.size());
  return 0;
}

int cmd_validate(const RunConfig& c) {
  const Study study = parse_study(c.study);
  const StudyResult r = validate_study(study, c.ions, c.cases, c.scenario.seed, resolve_workers(c.workers));
  const std::string h = c.hash();
  write_validation_csv(c.output_dir / "validation.csv", r.cases, h);
  const StudySummary& s = r.summary;
  nlohmann::json j{{"tool_version", ISDSIM_VERSION},
                   {"config_hash", h},
                   {"study", study_name(study)},
                   {"ions", c.ions},
                   {"cases", s.cases},
                   {"included", s.included},
                   {"excluded_near_zero_denominator", s.excluded},
                   {"zero_over_zero", s.zero_over_zero},
                   {"median_ratio", s.median_ratio},
                   {"low_error_median_ratio", s.low_error_median},
                   {"low_error_cases", s.low_error_cases},
                   {"high_error_cases", s.high_error_cases},
                   {"deviation_rate_high_error", s.deviation_rate_high},
                   {"deviation_rate_low_error", s.deviation_rate_low}};
  write_json(c.output_dir / "validation_summary.json", j);
  std::printf("%s n=%d: median ratio %.6f over %zu cases (%zu excluded)\n", study_name(study).c_str(), c.ions,
              s.median_ratio, s.included, s.excluded);
  return 0;
}

int cmd_dump(const RunConfig& c) {
  ArtifactCache cache = cache_for(c);
  const MapResolution res = c.resolution();
  const TwoColorGate gate = TwoColorGate::not_gate();
  const fs::path path = c.output_dir / ("dump_" + c.dump_what + ".csv");
  if (c.dump_what == "inside") {
    dump_inside(c, cache.inside(res, scheme(), gate, 1, false), path);
  } else if (c.dump_what == "outside") {
    dump_outside(c, cache.outside(res, gate, 1, false), path);
  } else if (c.dump_what == "excitation") {
    std::optional<PopulationProfile> p;
    if (c.scenario.use_windows) p = cache.profile(c.burn_config(), scheme(), false);
    dump_excitation(c, cache.excitation(res, scheme(), gate, 1, false), p ? &*p : nullptr, path);
  } else {
    fs::create_directories(c.output_dir);
    cache.profile(c.burn_config(), scheme(), false).save_csv(path, banner(c).substr(2));
  }
  say("wrote " + path.string());
  return 0;
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON configuration file (flags override it)")->check(CLI::ExistingFile);
  app->add_option("--preset", o.preset, "map resolution preset: full, fast or ci");
  app->add_option("--cache-dir", o.cache_dir, "artifact cache directory (default $ISDSIM_CACHE_DIR)");
  app->add_option("-o,--out", o.output_dir, "output directory");
  app->add_option("-j,--workers", o.workers, "worker threads (0 = all cores)");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--nu-init", o.nu_init, "hole-burning offset nu_init in Hz");
}

void add_scenario(CLI::App* app, Overrides& o) {
  app->add_option("--concentration", o.c_total, "total doping fraction, e.g. 0.01 for 1%");
  app->add_option("--radius", o.radius_nm, "sphere radius in nm");
  app->add_flag("--windows,!--no-windows", o.windows, "use burned transmission windows");
  app->add_option("-Q,--qubits", o.Q, "other qubits that ran gates first (0..50)");
  app->add_option("-G,--gates", o.G, "gates per other qubit (0, 1 or 10)");
  app->add_option("--trials", o.trials, "Monte Carlo trials");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isdsim: instantaneous spectral diffusion in rare-earth qubit crystals"};
  app.set_version_flag("--version", ISDSIM_VERSION);
  app.require_subcommand(1);
  Overrides o;
  bool dump_slice = false;

  auto* burn = app.add_subcommand("burn", "burn transmission windows and store the population profile");
  add_common(burn, o);
  auto* gen = app.add_subcommand("genmaps", "generate the lookup tables and excitation curves");
  add_common(gen, o);
  gen->add_flag("--dump-slice", dump_slice, "also write the inside-map slice at --shift");
  gen->add_option("--shift", o.shift, "shift for --dump-slice in Hz (default 0)");
  auto* camp = app.add_subcommand("campaign", "run a Monte Carlo campaign");
  add_common(camp, o);
  add_scenario(camp, o);
  camp->add_option("--mode", o.mode, "standard, per-gate or truncation");
  auto* val = app.add_subcommand("validate", "compare QBies with full simulations of random systems");
  add_common(val, o);
  val->add_option("--study", o.study, "crosstalk, decay or multi-ion");
  val->add_option("-n,--ions", o.ions, "non-qubit ions per system (multi-ion: 1..5)");
  val->add_option("--cases", o.cases, "random systems to simulate");
  auto* dump = app.add_subcommand("dump", "export a table slice as CSV");
  add_common(dump, o);
  dump->add_option("--what", o.what, "inside, outside, excitation or profile");
  dump->add_option("--shift", o.shift, "shift of the slice in Hz");
  dump->add_flag("--windows,!--no-windows", o.windows, "weight excitation with the burned profile");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const RunConfig c = merge(sub, o);
    if (sub == "burn") return cmd_burn(c);
    if (sub == "genmaps") return cmd_genmaps(c, dump_slice);
    if (sub == "campaign") return cmd_campaign(c);
    if (sub == "validate") return cmd_validate(c);
    return cmd_dump(c);
  } catch (const MissingInputError& e) {
    say(std::string("missing input: ") + e.what());
    return kExitMissing;
  } catch (const NumericalError& e) {
    say(std::string("numerical failure: ") + e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    say(std::string("usage: ") + e.what());
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    say(std::string("usage: ") + e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    say(std::string("error: ") + e.what());
    return 1;
  }
}

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

#include "isd/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "isd/csv.hpp"

namespace isd {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw std::invalid_argument("config: unknown key '" + k + "' in " + where);
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j, {"scenario", "preset", "cache_dir", "output_dir", "workers", "seed", "burn", "campaign",
                     "validate", "dump"},
                 "config");
  try {
    if (j.contains("scenario")) c.scenario = Scenario::from_json(j.at("scenario"), c.scenario);
    if (j.contains("seed")) c.scenario.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("preset")) c.preset = j.at("preset").get<std::string>();
    if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("burn")) {
      const auto& b = j.at("burn");
      reject_unknown(b, {"qubit_count", "grid_step_hz"}, "burn");
      if (b.contains("qubit_count")) c.qubit_count = b.at("qubit_count").get<int>();
      if (b.contains("grid_step_hz")) c.burn_grid_step_hz = b.at("grid_step_hz").get<double>();
    }
    if (j.contains("campaign")) {
      const auto& m = j.at("campaign");
      reject_unknown(m, {"mode", "per_gate_runs", "truncation_n", "truncation_r_nm"}, "campaign");
      if (m.contains("mode")) c.mode = m.at("mode").get<std::string>();
      if (m.contains("per_gate_runs")) {
        c.per_gate_runs.clear();
        for (const auto& p : m.at("per_gate_runs")) c.per_gate_runs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
      }
      if (m.contains("truncation_n")) c.truncation_n = m.at("truncation_n").get<std::vector<double>>();
      if (m.contains("truncation_r_nm")) c.truncation_r_nm = m.at("truncation_r_nm").get<std::vector<double>>();
    }
    if (j.contains("validate")) {
      const auto& v = j.at("validate");
      reject_unknown(v, {"study", "ions", "cases"}, "validate");
      if (v.contains("study")) c.study = v.at("study").get<std::string>();
      if (v.contains("ions")) c.ions = v.at("ions").get<int>();
      if (v.contains("cases")) c.cases = v.at("cases").get<int>();
    }
    if (j.contains("dump")) {
      const auto& d = j.at("dump");
      reject_unknown(d, {"what", "shift_hz"}, "dump");
      if (d.contains("what")) c.dump_what = d.at("what").get<std::string>();
      if (d.contains("shift_hz")) c.dump_shift_hz = d.at("shift_hz").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return from_json(j, std::move(base));
}

void RunConfig::validate() const {
  scenario.validate();
  (void)resolution();
  if (workers < 0) throw std::invalid_argument("workers must be >= 0 (0 = all cores)");
  if (qubit_count < 1) throw std::invalid_argument("burn: qubit_count must be positive");
  if (!(burn_grid_step_hz > 0.0)) throw std::invalid_argument("burn: grid step must be positive");
  if (mode != "standard" && mode != "per-gate" && mode != "truncation") {
    throw std::invalid_argument("campaign mode must be standard, per-gate or truncation");
  }
  for (const auto& [g, q] : per_gate_runs) {
    if (g != 0 && g != 1 && g != 10) throw std::invalid_argument("per-gate runs: G must be 0, 1 or 10");
    if (q < 0 || q > 50) throw std::invalid_argument("per-gate runs: Q must lie in 0..50");
  }
  (void)parse_study(study);
  const Study s = parse_study(study);
  if (s != Study::MultiIon && ions != 1) throw std::invalid_argument("validate: crosstalk and decay use one ion");
  if (ions < 1 || ions > RandomSystemSpec::kMaxIons) throw std::invalid_argument("validate: ions must lie in 1..5");
  if (cases < 1) throw std::invalid_argument("validate: cases must be at least 1");
  if (dump_what != "inside" && dump_what != "outside" && dump_what != "excitation" && dump_what != "profile") {
    throw std::invalid_argument("dump: what must be inside, outside, excitation or profile");
  }
}

BurnConfig RunConfig::burn_config() const {
  BurnConfig b;
  b.nu_init = scenario.nu_init;
  b.qubit_count = qubit_count;
  b.grid_step = burn_grid_step_hz;
  return b;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["scenario"] = scenario.to_json();
  j["preset"] = preset;
  j["burn"] = {{"qubit_count", qubit_count}, {"grid_step_hz", exact_number(burn_grid_step_hz)}};
  if (subcommand == "campaign") {
    j["campaign"]["mode"] = mode;
    if (mode == "per-gate") j["campaign"]["per_gate_runs"] = per_gate_runs;
    if (mode == "truncation") {
      j["campaign"]["truncation_n"] = truncation_n;
      j["campaign"]["truncation_r_nm"] = truncation_r_nm;
    }
  }
  if (subcommand == "validate") j["validate"] = {{"study", study}, {"ions", ions}, {"cases", cases}};
  if (subcommand == "dump") j["dump"] = {{"what", dump_what}, {"shift_hz", exact_number(dump_shift_hz)}};
  return j;
}

std::string RunConfig::hash() const { return hex64(fnv1a(to_json().dump())); }

}  // namespace isd

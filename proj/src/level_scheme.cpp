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

#include "isd/level_scheme.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace isd {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double LevelScheme::color_hz(int color) const {
  const int g = color == 0 ? roles.zero : roles.one;
  return transition_hz(g, roles.excited);
}

double LevelScheme::design_strength(int color) const {
  const int g = color == 0 ? roles.zero : roles.one;
  return strength(g, roles.excited);
}

double LevelScheme::branching(int ground, int excited) const {
  const double column = strength.col(excited).sum();
  return strength(ground, excited) / column;
}

void LevelScheme::validate() const {
  for (int i = 0; i < 3; ++i) {
    const double row = strength.row(i).sum();
    if (std::abs(row - 1.0) > 1e-12) {
      throw std::invalid_argument("level scheme: strength row " + std::to_string(i) +
                                  " does not sum to 1");
    }
    for (int j = 0; j < 3; ++j) {
      if (!(strength(i, j) >= 0.0 && strength(i, j) <= 1.0)) {
        throw std::invalid_argument("level scheme: strength outside [0,1]");
      }
    }
  }
  auto strictly_ordered = [](const std::array<double, 3>& e) {
    const bool up = e[0] < e[1] && e[1] < e[2];
    const bool down = e[0] > e[1] && e[1] > e[2];
    return up || down;
  };
  if (!strictly_ordered(ground_hz) || !strictly_ordered(excited_hz)) {
    throw std::invalid_argument("level scheme: energies not strictly ordered");
  }
  const std::array<int, 3> grounds{roles.zero, roles.one, roles.aux};
  for (int g : grounds) {
    if (g < 0 || g > 2) throw std::invalid_argument("level scheme: bad role index");
  }
  if (roles.zero == roles.one || roles.zero == roles.aux || roles.one == roles.aux ||
      roles.excited < 0 || roles.excited > 2) {
    throw std::invalid_argument("level scheme: roles must name distinct levels");
  }
}

nlohmann::json LevelScheme::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["version"] = version;
  j["ground_labels"] = ground_labels;
  j["excited_labels"] = excited_labels;
  j["ground_hz"] = ground_hz;
  j["excited_hz"] = excited_hz;
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    rows.push_back({strength(i, 0), strength(i, 1), strength(i, 2)});
  }
  j["rel_osc_strength"] = rows;
  j["roles"] = {{"zero", roles.zero}, {"one", roles.one}, {"aux", roles.aux},
                {"excited", roles.excited}};
  return j;
}

LevelScheme LevelScheme::from_json(const nlohmann::json& j) {
  LevelScheme s;
  s.name = j.value("name", std::string("custom"));
  s.version = j.value("version", 1);
  if (j.contains("ground_labels")) s.ground_labels = j.at("ground_labels");
  if (j.contains("excited_labels")) s.excited_labels = j.at("excited_labels");
  s.ground_hz = j.at("ground_hz").get<std::array<double, 3>>();
  s.excited_hz = j.at("excited_hz").get<std::array<double, 3>>();
  const auto& rows = j.at("rel_osc_strength");
  if (rows.size() != 3) throw std::invalid_argument("level scheme: need 3 strength rows");
  for (int i = 0; i < 3; ++i) {
    if (rows[i].size() != 3) throw std::invalid_argument("level scheme: need 3 columns");
    for (int k = 0; k < 3; ++k) s.strength(i, k) = rows[i][k].get<double>();
  }
  if (j.contains("roles")) {
    const auto& r = j.at("roles");
    s.roles.zero = r.value("zero", 0);
    s.roles.one = r.value("one", 1);
    s.roles.aux = r.value("aux", 2);
    s.roles.excited = r.value("excited", 2);
  }
  s.validate();
  return s;
}

LevelScheme LevelScheme::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open level scheme file " + path.string());
  return from_json(nlohmann::json::parse(in, nullptr, true, true));
}

std::uint64_t LevelScheme::hash() const { return fnv1a(to_json().dump()); }

LevelScheme LevelScheme::eu153_site1() {
  // Keep in sync with data/eu153_site1_levels.json.
  LevelScheme s;
  s.name = "153Eu:Y2SiO5 site 1";
  s.version = 1;
  // |0> = 1/2g on top, |1> = 3/2g 90 MHz below, |aux> = 5/2g another 119.2 MHz below.
  s.ground_hz = {0.0, -90.0e6, -209.2e6};
  // |e> = 5/2e; 3/2e 260 MHz below; 1/2e a further 191.05 MHz below.
  s.excited_hz = {-451.05e6, -260.0e6, 0.0};
  s.strength << 0.15, 0.30, 0.55,  //
      0.30, 0.30, 0.40,            //
      0.55, 0.40, 0.05;
  s.roles = RoleMap{0, 1, 2, 2};
  s.validate();
  return s;
}

}  // namespace isd

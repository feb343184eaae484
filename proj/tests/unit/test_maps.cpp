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
#include "isd/isd_maps.hpp"

using namespace isd;
namespace fs = std::filesystem;

namespace {

const LevelScheme& eu() {
  static const LevelScheme s = LevelScheme::eu153_site1();
  return s;
}

MapResolution tiny() {
  MapResolution r = MapResolution::preset_named("ci");
  r.preset = "tiny";
  r.shifts_per_sign = 2;
  r.detuning_step_hz = 500e6;
  r.resonance_offsets_hz = {};
  r.p_points = 5;
  return r;
}

const InsideMap& tiny_inside() {
  static const InsideMap m = generate_inside_map(tiny(), eu(), TwoColorGate::not_gate(), 1);
  return m;
}

const OutsideMap& tiny_outside() {
  static const OutsideMap m = generate_outside_map(tiny(), TwoColorGate::not_gate(), 1);
  return m;
}

// Shift-dense table on a three-point detuning grid, filled point by point.
const InsideMap& dense_inside() {
  static const InsideMap m = [] {
    InsideMap m;
    m.resolution = MapResolution::preset_named("fast");
    m.scheme = eu();
    m.gate = TwoColorGate::not_gate();
    m.shift_grid = signed_log_grid(21, 1e3, 100e6);
    m.detuning_grid = {-10e6, 0.0, 10e6};
    m.reference = simulate_reference(m.gate, m.resolution.map_tol);
    for (int s = 0; s < 3; ++s)
      for (double shift : m.shift_grid)
        for (double d : m.detuning_grid)
          m.values[s].push_back(shift == 0.0 ? m.reference
                                             : simulate_inside_point(eu(), m.gate, shift, d, s, m.resolution.map_tol));
    return m;
  }();
  return m;
}

double err(const ErrorSourceEffect& e) {
  const BlochVector t = not_target_bloch();
  return error_from_bloch(e.apply(t), t);
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("isd_test_" + name); }

}  // namespace

TEST_CASE("grids") {
  const auto g = signed_log_grid(3, 1e3, 1e6);
  REQUIRE(g.size() == 7);
  CHECK(g[3] == 0.0);
  CHECK(g[4] == doctest::Approx(1e3));
  CHECK(g[5] == doctest::Approx(std::sqrt(1e9)));
  CHECK(g[0] == doctest::Approx(-1e6));

  const auto res = resonant_detunings(eu());
  CHECK(res.size() == 15);
  for (double d : res) {
    CHECK(d >= -335e6);
    CHECK(d < 665e6);
  }
  CHECK(std::find(res.begin(), res.end(), 0.0) != res.end());
  const auto grid = channel_detuning_grid(eu(), 100e6, {1e6});
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] - grid[i - 1] >= 1e3);
  CHECK(grid.front() == -335e6);
  CHECK(grid.back() == 665e6);
  for (double d : res) {
    CHECK(std::count(grid.begin(), grid.end(), d + 1e6) + std::count(grid.begin(), grid.end(), d - 1e6) >= 1);
  }
  CHECK_THROWS_AS(MapResolution::preset_named("bogus"), std::invalid_argument);
  CHECK(MapResolution::preset_named("full").hash() != MapResolution::preset_named("fast").hash());
}

TEST_CASE("inside map: zero shift gives the target and grid nodes are exact") {
  const InsideMap& m = tiny_inside();
  m.validate();
  const BlochVector t = not_target_bloch();
  for (double d : m.detuning_grid)
    for (int s = 0; s < 3; ++s) {
      const ErrorSourceEffect e = m.query(0.0, d, s);
      CHECK(e.is_identity());
      CHECK((e.apply(t) - t).norm() == 0.0);
    }
  // Stored rows of the zero-shift column equal the neighbour-free gate.
  const std::size_t i0 = std::find(m.shift_grid.begin(), m.shift_grid.end(), 0.0) - m.shift_grid.begin();
  for (std::size_t id = 0; id < m.detuning_grid.size(); ++id) CHECK((m.at(0, i0, id) - m.reference).norm() == 0.0);
  CHECK((m.reference - t).norm() < 1e-7);

  for (std::size_t is = 0; is < m.shift_grid.size(); ++is)
    for (std::size_t id = 0; id < m.detuning_grid.size(); id += 3)
      for (int s = 0; s < 3; ++s)
        CHECK((m.interpolate(m.shift_grid[is], m.detuning_grid[id], s) - m.at(s, is, id)).norm() < 1e-14);

  // A node value agrees with a fresh simulation at that node.
  const std::size_t is = m.shift_grid.size() - 2;
  const BlochVector direct = simulate_inside_point(eu(), m.gate, m.shift_grid[is], m.detuning_grid[2], 1, m.resolution.map_tol);
  CHECK((direct - m.at(1, is, 2)).norm() < 1e-6);
}

TEST_CASE("inside map: range handling") {
  const InsideMap& m = tiny_inside();
  CHECK_THROWS_AS(m.query(1e6, 700e6, 0), std::out_of_range);
  CHECK_THROWS_AS(m.query(1e6, 0.0, 3), std::invalid_argument);
  // Beyond the table the ion is simulated on the spot.
  const double d = m.detuning_grid[3];
  const ErrorSourceEffect fallback = m.query(150e6, d, 0);
  const ErrorSourceEffect direct =
      relative_effect(simulate_inside_point(eu(), m.gate, 150e6, d, 0, m.resolution.map_tol), m.reference);
  CHECK(fallback.angle == doctest::Approx(direct.angle).epsilon(1e-9));
  CHECK(fallback.shrinkage == doctest::Approx(direct.shrinkage).epsilon(1e-12));
}

TEST_CASE("inside map: small shifts scale toward the identity") {
  const InsideMap& m = dense_inside();
  const ErrorSourceEffect at_node = m.query(1e3, 0.0, 0);
  const ErrorSourceEffect half = m.query(0.5e3, 0.0, 0);
  CHECK(half.angle == doctest::Approx(0.5 * at_node.angle));
  CHECK(1.0 - half.shrinkage == doctest::Approx(0.25 * (1.0 - at_node.shrinkage)));
}

TEST_CASE("inside map: midpoints against direct simulation") {
  const InsideMap& m = dense_inside();
  int compared = 0;
  for (int state : {0, 1})
    for (std::size_t k = 0; k + 1 < m.shift_grid.size(); ++k) {
      const double a = m.shift_grid[k], b = m.shift_grid[k + 1];
      if (a < 1e3 || b > 1e7) continue;  // quadratic-to-saturation range of the resonant ion
      const double mid = 1e3 * std::sinh(0.5 * (shift_coordinate(a) + shift_coordinate(b)));
      const double interp = err(m.query(mid, 0.0, state));
      const double direct = err(relative_effect(
          simulate_inside_point(eu(), m.gate, mid, 0.0, state, m.resolution.map_tol), m.reference));
      CHECK(std::abs(interp - direct) <= 0.2 * direct);
      ++compared;
    }
  CHECK(compared > 10);
}

TEST_CASE("inside map: save and load round trip") {
  const InsideMap& m = tiny_inside();
  const fs::path p = temp_file("inside.csv");
  m.save(p);
  const InsideMap n = InsideMap::load(p);
  CHECK(n.key() == m.key());
  CHECK(n.key() == inside_map_key(m.resolution, eu(), m.gate));
  CHECK(n.shift_grid == m.shift_grid);
  CHECK(n.detuning_grid == m.detuning_grid);
  for (int s = 0; s < 3; ++s) CHECK(n.values[s] == m.values[s]);

  // Edit one stored number: the file no longer matches its key.
  std::ifstream in(p);
  std::stringstream all;
  all << in.rdbuf();
  in.close();
  std::string text = all.str();
  const auto pos = text.rfind('\n', text.size() - 2);
  std::ofstream(p) << text.substr(0, pos + 1) << "1" << text.substr(pos + 1);
  CHECK_THROWS_AS(InsideMap::load(p), MapFormatError);
  std::ofstream(p) << "not a map\n";
  CHECK_THROWS_AS(InsideMap::load(p), MapFormatError);
  fs::remove(p);
}

TEST_CASE("outside map: identities, linearity in p and clamping") {
  const OutsideMap& m = tiny_outside();
  m.validate();
  const BlochVector t = not_target_bloch();
  CHECK(m.p_grid.front() == 0.0);
  CHECK(m.p_grid.back() == doctest::Approx(1.0));
  for (std::size_t is = 0; is < m.shift_grid.size(); ++is) CHECK((m.at(is, 0) - t).norm() == 0.0);
  CHECK(m.query(3e6, 0.0).is_identity());
  CHECK(m.query(0.0, 1e-3).is_identity());

  // (1 - p) target + p a_e at every node.
  for (std::size_t is = 0; is < m.shift_grid.size(); ++is) {
    const BlochVector ae = m.at(is, m.p_grid.size() - 1);
    for (std::size_t ip = 0; ip < m.p_grid.size(); ++ip) {
      const double p = m.p_grid[ip];
      CHECK((m.at(is, ip) - ((1 - p) * t + p * ae)).norm() < 1e-14);
    }
  }
  const double s = m.shift_grid.back();
  const BlochVector ae = simulate_outside_excited(m.gate, s, m.resolution.map_tol);
  CHECK((ae - m.at(m.shift_grid.size() - 1, m.p_grid.size() - 1)).norm() < 1e-6);
  const double p = 3.3e-4;  // off the p grid: interpolation is exact in p
  CHECK((m.interpolate(s, p) - ((1 - p) * t + p * ae)).norm() < 1e-6 * p);

  CHECK(err(m.query(150e6, 1e-3)) == doctest::Approx(err(m.query(100e6, 1e-3))));
  CHECK_THROWS_AS(m.query(1e6, 1.5), std::out_of_range);
  // A fully excited neighbour far off resonance costs its own excitation: error -> p.
  CHECK(err(m.query(100e6, 1e-3)) == doctest::Approx(1e-3).epsilon(0.01));
}

TEST_CASE("outside map: save and load round trip") {
  const OutsideMap& m = tiny_outside();
  const fs::path p = temp_file("outside.csv");
  m.save(p);
  const OutsideMap n = OutsideMap::load(p);
  fs::remove(p);
  CHECK(n.key() == m.key());
  CHECK(n.key() == outside_map_key(m.resolution, m.gate));
  CHECK(n.values == m.values);
}

TEST_CASE("excitation curves: interpolation and weighting") {
  ExcitationCurves c;
  c.resolution = tiny();
  c.scheme = eu();
  c.gate = TwoColorGate::not_gate();
  c.detuning_grid = {-335e6, 0.0, 100e6, 665e6};
  for (int slot = 0; slot < 2; ++slot)
    for (int g = 0; g < 3; ++g) c.excited[slot][g] = {1e-8, (slot + 1) * 1e-2 * (g + 1), 1e-6, 0.0};
  c.validate();
  CHECK(c.per_ground(1, 0, 0.0) == doctest::Approx(1e-2));
  CHECK(c.per_ground(10, 2, 0.0) == doctest::Approx(6e-2));
  // Log-linear between positive nodes.
  CHECK(c.per_ground(1, 0, 50e6) == doctest::Approx(std::sqrt(1e-2 * 1e-6)));
  // Linear next to a zero node.
  CHECK(c.per_ground(1, 0, 382.5e6) == doctest::Approx(0.5e-6));
  CHECK(c.excited_population(0, 0.0, nullptr) == 0.0);
  CHECK(c.excited_population(1, 0.0, nullptr) == doctest::Approx((1e-2 + 2e-2 + 3e-2) / 3));
  CHECK_THROWS_AS(c.per_ground(1, 0, 700e6), std::out_of_range);
  CHECK_THROWS(ExcitationCurves::slot(5));

  const fs::path p = temp_file("excitation.csv");
  c.save(p);
  const ExcitationCurves d = ExcitationCurves::load(p);
  fs::remove(p);
  CHECK(d.key() == c.key());
  CHECK(d.excited == c.excited);
}

TEST_CASE("excitation far from every resonance is small") {
  const TwoColorGate gate = TwoColorGate::not_gate();
  const Tolerance tol{1e-8, 1e-10};
  for (double d : {-300e6, 200e6, 620e6}) {
    const auto e = simulate_excitation(eu(), gate, d, 0, tol);
    CHECK(e[0] < 1e-6);
    CHECK(e[0] >= 0.0);
  }
  // Repeated gates at a resonant feature, reported only.
  const auto r = simulate_excitation(eu(), gate, 0.5e6, 0, tol);
  MESSAGE("excitation at +0.5 MHz, ground 0: G=1 ", r[0], ", G=10 ", r[1]);
}

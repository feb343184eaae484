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
#include <numbers>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "isd/lattice.hpp"
#include "isd/parallel.hpp"
#include "isd/rng.hpp"

using namespace isd;

TEST_CASE("counter rng streams are pure functions of their key") {
  CounterRng a(7, 3, Stream::Doping), b(7, 3, Stream::Doping);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CounterRng c(7, 3, Stream::Frequency), d(7, 4, Stream::Doping), e(8, 3, Stream::Doping);
  CounterRng f(7, 3, Stream::Doping);
  const auto x = f();
  CHECK(c() != x);
  CHECK(d() != x);
  CHECK(e() != x);
}

TEST_CASE("rng distributions") {
  CounterRng r(1, 0, Stream::Validation);
  const int n = 200000;
  double sum = 0.0, log_sum = 0.0;
  int inside_hwhm = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    const double l = r.log_uniform(1e3, 1e8);
    REQUIRE(l >= 1e3);
    REQUIRE(l <= 1e8);
    log_sum += std::log10(l);
    if (std::abs(r.cauchy(5.0, 2.0) - 5.0) < 1.0) ++inside_hwhm;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(log_sum / n == doctest::Approx(5.5).epsilon(0.01));
  // Half of a Lorentzian lies within one half width of its centre.
  CHECK(inside_hwhm / double(n) == doctest::Approx(0.5).epsilon(0.01));

  // Geometric skips reproduce Bernoulli thinning.
  const double p = 0.02;
  double skips = 0.0;
  for (int i = 0; i < n; ++i) skips += static_cast<double>(r.geometric(p));
  CHECK(skips / n == doctest::Approx((1 - p) / p).epsilon(0.02));

  const double w[3] = {1.0, 0.0, 3.0};
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 40000; ++i) ++counts[r.categorical(w, 3)];
  CHECK(counts[1] == 0);
  CHECK(counts[2] / 40000.0 == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("unit cell geometry") {
  const UnitCell cell = UnitCell::y2sio5();
  cell.validate();
  const Eigen::Matrix3d B = cell.basis();
  const double beta = cell.beta_deg * std::numbers::pi / 180.0;
  CHECK(std::abs(B.determinant()) == doctest::Approx(cell.a_nm * cell.b_nm * cell.c_nm * std::sin(beta)));
  CHECK(B.col(0).norm() == doctest::Approx(cell.a_nm));
  CHECK(B.col(2).norm() == doctest::Approx(cell.c_nm));
  CHECK(std::acos(B.col(0).dot(B.col(2)) / (cell.a_nm * cell.c_nm)) == doctest::Approx(beta));

  const auto sites = cell.sites();
  REQUIRE(sites.size() == 16);
  int class1 = 0;
  for (const auto& s : sites) {
    class1 += s.site_class == 1;
    for (int k = 0; k < 3; ++k) {
      CHECK(s.fractional[k] >= 0.0);
      CHECK(s.fractional[k] < 1.0);
    }
  }
  CHECK(class1 == 8);

  // Shortest yttrium-yttrium distance over neighbouring cells.
  double dmin = 1e9;
  for (const auto& s : sites)
    for (const auto& t : sites)
      for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
          for (int k = -1; k <= 1; ++k) {
            const Eigen::Vector3d d = B * (t.fractional + Eigen::Vector3d(i, j, k) - s.fractional);
            if (d.norm() > 1e-9) dmin = std::min(dmin, d.norm());
          }
  CHECK(dmin > 0.33);
  CHECK(dmin < 0.35);

  const Eigen::Vector3d d1 = cell.d1_axis();
  CHECK(d1.norm() == doctest::Approx(1.0));
  CHECK(std::acos(d1.dot(B.col(2).normalized())) * 180.0 / std::numbers::pi ==
        doctest::Approx(cell.d1_angle_from_c_deg));
  CHECK(std::abs(d1.dot(B.col(1))) < 1e-12);  // D1 lies in the a-c plane
}

TEST_CASE("dipole differences of the four orientation classes") {
  const UnitCell cell = UnitCell::y2sio5();
  const Eigen::Vector3d m0 = cell.delta_mu(0);
  CHECK(m0.norm() == doctest::Approx(cell.delta_mu_cm));
  CHECK((cell.delta_mu(1) + m0).norm() < 1e-12 * m0.norm());
  for (int o = 0; o < 4; ++o) CHECK(cell.delta_mu(o).norm() == doctest::Approx(cell.delta_mu_cm));
  // The two-fold axis along b keeps the b component and flips the others.
  const Eigen::Vector3d m3 = cell.delta_mu(3);
  CHECK(m3[1] == doctest::Approx(m0[1]));
  CHECK(m3[0] == doctest::Approx(-m0[0]));
}

TEST_CASE("dipole-dipole shift against hand-evaluated formula") {
  const double eps = 11.0;
  const double eps0 = 8.8541878128e-12, h = 6.62607015e-34;
  const double k = (eps + 2) * (eps + 2) / (9 * eps) / (4 * std::numbers::pi * eps0 * h);
  CHECK(dipole_constant(eps) == doctest::Approx(k).epsilon(1e-12));

  DopedIon a, b;
  a.delta_mu = b.delta_mu = Eigen::Vector3d(0, 0, 1e-31);
  b.position_nm = Eigen::Vector3d(1.0, 0, 0);  // perpendicular to the dipoles
  const double perp = dipole_shift(a, b, eps);
  CHECK(perp == doctest::Approx(k * 1e-62 / 1e-27));
  b.position_nm = Eigen::Vector3d(0, 0, 1.0);  // along the dipoles
  CHECK(dipole_shift(a, b, eps) == doctest::Approx(-2.0 * perp));
  b.position_nm = Eigen::Vector3d(0, 0, 2.0);
  CHECK(dipole_shift(a, b, eps) == doctest::Approx(-2.0 * perp / 8.0));
  CHECK(dipole_shift(a, b, eps) == doctest::Approx(dipole_shift(b, a, eps)));
}

TEST_CASE("channel bookkeeping") {
  auto c = channel_index(0.0);
  CHECK(c.qubit == 0);
  CHECK(c.offset_hz == 0.0);
  c = channel_index(700e6);  // qubit 1 sits at +1 GHz
  CHECK(c.qubit == 1);
  CHECK(c.offset_hz == doctest::Approx(-300e6));
  c = channel_index(-400e6);  // qubit 2 sits at -1 GHz
  CHECK(c.qubit == 2);
  CHECK(c.offset_hz == doctest::Approx(600e6));
  c = channel_index(-335e6);
  CHECK(c.qubit == 0);
  c = channel_index(665e6);
  CHECK(c.qubit == 1);
  CHECK(inhomogeneous_fwhm(0.01) == doctest::Approx(1.8e9 + 18e9));
}

TEST_CASE("doped sphere") {
  const UnitCell cell = UnitCell::y2sio5();
  const auto empty = dope_sphere(cell, 0.0, 1);
  CHECK(empty.neighbors.empty());
  CHECK(empty.site2_dopants == 0);
  CHECK(empty.qubit.position_nm.norm() < 1.0);  // nearest site-1 position to the origin

  DopingOptions opt;
  opt.radius_nm = 12.0;
  auto s = dope_sphere(cell, 0.02, 5, 0, opt);
  auto t = dope_sphere(cell, 0.02, 5, 0, opt);
  REQUIRE(s.neighbors.size() == t.neighbors.size());
  for (std::size_t i = 0; i < s.neighbors.size(); ++i) {
    CHECK(s.neighbors[i].position_nm == t.neighbors[i].position_nm);
    CHECK(s.neighbors[i].distance_nm <= opt.radius_nm);
    CHECK((s.neighbors[i].position_nm - s.qubit.position_nm).norm() == doctest::Approx(s.neighbors[i].distance_nm));
    CHECK(s.neighbors[i].distance_nm > 0.3);
    CHECK(s.neighbors[i].site_class == 1);
  }
  // Site-1 positions are doped with probability c_total (half the dopants on half the sites).
  const double n = static_cast<double>(s.site1_positions);
  const double mean = 0.02 * n, sd = std::sqrt(n * 0.02 * 0.98);
  CHECK(std::abs(s.neighbors.size() - mean) < 5 * sd);
  // Site-1 density of the lattice: 8 per cell volume.
  const double volume = std::abs(cell.basis().determinant());
  CHECK(n == doctest::Approx(8.0 / volume * 4.0 / 3.0 * std::numbers::pi * std::pow(12.0, 3)).epsilon(0.03));

  assign_frequencies(s);
  CHECK(s.qubit.detuning_hz == 0.0);
  for (const auto& ion : s.neighbors) {
    CHECK(ion.shift_to_qubit_hz == doctest::Approx(dipole_shift(ion, s.qubit)));
    const auto ch = channel_index(ion.detuning_hz);
    CHECK(ch.qubit == ion.channel.qubit);
  }
  assign_initial_states(s, nullptr);
  std::set<int> states;
  for (const auto& ion : s.neighbors) states.insert(ion.initial_state);
  CHECK(states == std::set<int>{0, 1, 2});
}

TEST_CASE("parallel_for visits every index once and reports the first failure") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  try {
    parallel_for(100, 3, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}

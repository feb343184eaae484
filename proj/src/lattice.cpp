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

#include "isd/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "isd/level_scheme.hpp"
#include "isd/rng.hpp"

namespace isd {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m
constexpr double kPlanck = 6.62607015e-34;      // J s

Eigen::Vector3d wrap(Eigen::Vector3d f) {
  for (int k = 0; k < 3; ++k) {
    f[k] -= std::floor(f[k]);
    if (f[k] >= 1.0 - 1e-12) f[k] = 0.0;
  }
  return f;
}

}  // namespace

UnitCell UnitCell::from_json(const nlohmann::json& j) {
  UnitCell c;
  c.a_nm = j.at("a_nm");
  c.b_nm = j.at("b_nm");
  c.c_nm = j.at("c_nm");
  c.alpha_deg = j.value("alpha_deg", 90.0);
  c.beta_deg = j.at("beta_deg");
  c.gamma_deg = j.value("gamma_deg", 90.0);
  for (const auto& s : j.at("y_sites")) {
    const auto f = s.at("fractional").get<std::vector<double>>();
    if (f.size() != 3) throw std::invalid_argument("lattice: fractional coordinates need 3 entries");
    c.asymmetric.push_back({s.value("label", std::string("Y")), Eigen::Vector3d(f[0], f[1], f[2]),
                            s.at("coordination").get<int>()});
  }
  c.d1_angle_from_c_deg = j.value("d1_angle_from_c_deg", 23.8);
  c.delta_mu_cm = j.value("delta_mu_cm", 7.6e-32);
  c.epsilon_static = j.value("epsilon_static", 11.0);
  c.validate();
  return c;
}

UnitCell UnitCell::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lattice file " + path.string());
  return from_json(nlohmann::json::parse(in));
}

UnitCell UnitCell::y2sio5() {
  // Keep in sync with data/y2sio5_x2_lattice.json.
  UnitCell c;
  c.asymmetric = {{"Y1", {0.0369, 0.2563, 0.4660}, 7}, {"Y2", {0.3590, 0.1224, 0.1662}, 6}};
  c.validate();
  return c;
}

Eigen::Matrix3d UnitCell::basis() const {
  const double beta = beta_deg * kDeg;
  Eigen::Matrix3d m;
  m.col(0) = Eigen::Vector3d(a_nm, 0.0, 0.0);
  m.col(1) = Eigen::Vector3d(0.0, b_nm, 0.0);
  m.col(2) = Eigen::Vector3d(c_nm * std::cos(beta), 0.0, c_nm * std::sin(beta));
  return m;
}

std::vector<UnitCell::Site> UnitCell::sites() const {
  std::vector<Site> out;
  for (const auto& s : asymmetric) {
    const double x = s.fractional.x(), y = s.fractional.y(), z = s.fractional.z();
    const int cls = s.coordination == 6 ? 1 : 2;
    const Eigen::Vector3d ops[4] = {{x, y, z}, {-x, -y, -z}, {x, -y, z + 0.5}, {-x, y, 0.5 - z}};
    for (const Eigen::Vector3d& centring : {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0.5, 0.5, 0)}) {
      for (int o = 0; o < 4; ++o) out.push_back({wrap(ops[o] + centring), cls, o});
    }
  }
  return out;
}

Eigen::Vector3d UnitCell::d1_axis() const {
  const Eigen::Matrix3d m = basis();
  const Eigen::Vector3d c_dir = m.col(2).normalized();
  // Rotate c toward a within the a-c plane (about -b when a x c points along -b).
  const Eigen::Vector3d a_dir = m.col(0).normalized();
  const Eigen::Vector3d perp = (a_dir - a_dir.dot(c_dir) * c_dir).normalized();
  const double t = d1_angle_from_c_deg * kDeg;
  return (std::cos(t) * c_dir + std::sin(t) * perp).normalized();
}

Eigen::Vector3d UnitCell::delta_mu(int orientation) const {
  const Eigen::Vector3d d = delta_mu_cm * d1_axis();
  switch (orientation) {
    case 0:
      return d;
    case 1:
      return -d;
    case 2:
      return {d.x(), -d.y(), d.z()};
    case 3:
      return {-d.x(), d.y(), -d.z()};
  }
  throw std::invalid_argument("lattice: orientation class must be 0..3");
}

void UnitCell::validate() const {
  if (!(a_nm > 0 && b_nm > 0 && c_nm > 0)) throw std::invalid_argument("lattice: non-positive constants");
  if (asymmetric.empty()) throw std::invalid_argument("lattice: no yttrium sites");
  const auto all = sites();
  int site1 = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].site_class == 1) ++site1;
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      Eigen::Vector3d d = all[i].fractional - all[j].fractional;
      for (int k = 0; k < 3; ++k) d[k] -= std::round(d[k]);
      if ((basis() * d).norm() < 0.1) throw std::invalid_argument("lattice: symmetry copies coincide");
    }
  }
  if (site1 == 0) throw std::invalid_argument("lattice: no coordination-6 site");
}

std::uint64_t UnitCell::hash() const {
  nlohmann::json j;
  j["abc"] = {a_nm, b_nm, c_nm, alpha_deg, beta_deg, gamma_deg};
  for (const auto& s : asymmetric) j["sites"].push_back({s.fractional.x(), s.fractional.y(), s.fractional.z(), s.coordination});
  j["d1"] = d1_angle_from_c_deg;
  j["mu"] = delta_mu_cm;
  j["eps"] = epsilon_static;
  return fnv1a(j.dump());
}

double dipole_constant(double epsilon_static) {
  const double e = epsilon_static;
  return (e + 2.0) * (e + 2.0) / (9.0 * e) / (4.0 * std::numbers::pi * kEpsilon0 * kPlanck);
}

double dipole_shift(const DopedIon& a, const DopedIon& b, double epsilon_static) {
  const Eigen::Vector3d r = (b.position_nm - a.position_nm) * 1e-9;
  const double len = r.norm();
  if (!(len > 0.0)) throw std::invalid_argument("dipole_shift: coincident positions");
  const Eigen::Vector3d u = r / len;
  const double angular = a.delta_mu.dot(b.delta_mu) - 3.0 * a.delta_mu.dot(u) * u.dot(b.delta_mu);
  return dipole_constant(epsilon_static) / (len * len * len) * angular;
}

ChannelAssignment channel_index(double detuning_hz) {
  const double k = std::floor((detuning_hz + 335.0e6) / 1.0e9);
  ChannelAssignment out;
  if (!std::isfinite(k) || std::abs(k) > 1.0e9) {
    out.qubit = ChannelAssignment::kOutside;
    out.offset_hz = detuning_hz;
    return out;
  }
  const auto ki = static_cast<long long>(k);
  out.qubit = static_cast<int>(ki > 0 ? 2 * ki - 1 : -2 * ki);
  out.offset_hz = detuning_hz - 1.0e9 * k;
  return out;
}

double inhomogeneous_fwhm(double c_total) { return 1.8e9 + 1800.0e9 * c_total; }

nlohmann::json IonSurrounding::to_json() const {
  auto ion_json = [](const DopedIon& d) {
    return nlohmann::json{{"r_nm", {d.position_nm.x(), d.position_nm.y(), d.position_nm.z()}},
                          {"orientation", d.orientation},
                          {"site", d.site_class},
                          {"detuning_hz", d.detuning_hz},
                          {"channel", d.channel.qubit},
                          {"channel_offset_hz", d.channel.offset_hz},
                          {"initial_state", d.initial_state},
                          {"shift_hz", d.shift_to_qubit_hz}};
  };
  nlohmann::json j;
  j["seed"] = seed;
  j["trial"] = trial;
  j["c_total"] = c_total;
  j["radius_nm"] = radius_nm;
  j["site2_dopants"] = site2_dopants;
  j["site1_positions"] = site1_positions;
  j["qubit"] = ion_json(qubit);
  j["neighbors"] = nlohmann::json::array();
  for (const auto& n : neighbors) j["neighbors"].push_back(ion_json(n));
  return j;
}

IonSurrounding dope_sphere(const UnitCell& cell, double c_total, std::uint64_t seed, std::uint64_t trial,
                           const DopingOptions& options) {
  if (!(c_total >= 0.0 && c_total <= 0.05)) {
    throw std::invalid_argument("dope_sphere: c_total must lie in [0, 0.05]");
  }
  if (!(options.radius_nm > 0.0)) throw std::invalid_argument("dope_sphere: radius must be positive");
  if (!(options.site1_fraction >= 0.0 && options.site1_fraction <= 1.0)) {
    throw std::invalid_argument("dope_sphere: site1_fraction must lie in [0, 1]");
  }
  const Eigen::Matrix3d m = cell.basis();
  const auto all = cell.sites();
  std::vector<UnitCell::Site> site1, site2;
  for (const auto& s : all) (s.site_class == 1 ? site1 : site2).push_back(s);

  IonSurrounding out;
  out.seed = seed;
  out.trial = trial;
  out.c_total = c_total;
  out.radius_nm = options.radius_nm;

  // Qubit: site-1 position nearest the cell origin.
  double best = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k)
        for (const auto& s : site1) {
          const Eigen::Vector3d r = m * (s.fractional + Eigen::Vector3d(i, j, k));
          if (r.norm() < best) {
            best = r.norm();
            out.qubit.position_nm = r;
            out.qubit.orientation = s.orientation;
          }
        }
  out.qubit.delta_mu = cell.delta_mu(out.qubit.orientation);
  out.qubit.site_class = 1;
  const Eigen::Vector3d centre = out.qubit.position_nm;

  // Cell index box that covers the sphere.
  const Eigen::Matrix3d inv = m.inverse();
  const Eigen::Vector3d cf = inv * centre;
  std::array<long, 3> lo{}, n{};
  for (int d = 0; d < 3; ++d) {
    const double reach = options.radius_nm * inv.row(d).norm();
    lo[d] = static_cast<long>(std::floor(cf[d] - reach)) - 1;
    n[d] = static_cast<long>(std::ceil(cf[d] + reach)) + 1 - lo[d] + 1;
  }
  const double r2 = options.radius_nm * options.radius_nm;

  auto position = [&](const std::vector<UnitCell::Site>& list, std::uint64_t idx, int& orientation) {
    const std::uint64_t per = list.size();
    const auto s = static_cast<std::size_t>(idx % per);
    std::uint64_t cellidx = idx / per;
    const long k = static_cast<long>(cellidx % n[2]) + lo[2];
    cellidx /= n[2];
    const long j = static_cast<long>(cellidx % n[1]) + lo[1];
    const long i = static_cast<long>(cellidx / n[1]) + lo[0];
    orientation = list[s].orientation;
    return Eigen::Vector3d(m * (list[s].fractional + Eigen::Vector3d(i, j, k)));
  };
  const std::uint64_t cells = static_cast<std::uint64_t>(n[0] * n[1] * n[2]);

  // Count candidate positions (deterministic, independent of the draw).
  {
    std::size_t count = 0;
    int o;
    for (std::uint64_t idx = 0; idx < cells * site1.size(); ++idx) {
      const Eigen::Vector3d r = position(site1, idx, o) - centre;
      if (r.squaredNorm() <= r2) ++count;
    }
    out.site1_positions = count - 1;  // minus the qubit
  }

  const double p1 = std::min(1.0, 2.0 * options.site1_fraction * c_total);
  const double p2 = std::min(1.0, 2.0 * (1.0 - options.site1_fraction) * c_total);
  if (p1 > 0.0) {
    CounterRng rng(seed, trial, Stream::Doping);
    const std::uint64_t total = cells * site1.size();
    for (std::uint64_t idx = rng.geometric(p1); idx < total; idx += 1 + rng.geometric(p1)) {
      int o;
      const Eigen::Vector3d r = position(site1, idx, o);
      const Eigen::Vector3d rel = r - centre;
      const double d2 = rel.squaredNorm();
      if (d2 > r2 || d2 < 1e-6) continue;
      DopedIon ion;
      ion.position_nm = r;
      ion.orientation = o;
      ion.site_class = 1;
      ion.delta_mu = cell.delta_mu(o);
      ion.distance_nm = std::sqrt(d2);
      ion.shift_to_qubit_hz = dipole_shift(out.qubit, ion, cell.epsilon_static);
      out.neighbors.push_back(ion);
    }
  }
  if (p2 > 0.0 && !site2.empty()) {
    CounterRng rng(seed, trial, Stream::Site2);
    const std::uint64_t total = cells * site2.size();
    for (std::uint64_t idx = rng.geometric(p2); idx < total; idx += 1 + rng.geometric(p2)) {
      int o;
      if ((position(site2, idx, o) - centre).squaredNorm() <= r2) ++out.site2_dopants;
    }
  }
  return out;
}

void assign_frequencies(IonSurrounding& s) {
  const double fwhm = inhomogeneous_fwhm(s.c_total);
  CounterRng rng(s.seed, s.trial, Stream::Frequency);
  s.qubit.detuning_hz = 0.0;
  s.qubit.channel = channel_index(0.0);
  for (auto& ion : s.neighbors) {
    ion.detuning_hz = rng.cauchy(0.0, fwhm);
    ion.channel = channel_index(ion.detuning_hz);
  }
}

void assign_initial_states(IonSurrounding& s, const PopulationProfile* windows) {
  CounterRng rng(s.seed, s.trial, Stream::InitialState);
  for (auto& ion : s.neighbors) {
    if (windows == nullptr) {
      ion.initial_state = static_cast<int>(rng.below(3));
    } else {
      const auto p = windows->ground_probabilities(ion.channel.offset_hz);
      ion.initial_state = rng.categorical(p.data(), 3);
    }
  }
}

}  // namespace isd

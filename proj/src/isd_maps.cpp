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

#include "isd/isd_maps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "isd/csv.hpp"
#include "isd/evolve.hpp"
#include "isd/parallel.hpp"
#include "isd/system.hpp"

namespace isd {

namespace {

nlohmann::json tol_json(const Tolerance& t) { return {t.rtol, t.atol}; }

Tolerance tol_from(const nlohmann::json& j) {
  Tolerance t;
  t.rtol = j.at(0);
  t.atol = j.at(1);
  return t;
}

nlohmann::json gate_json(const TwoColorGate& g) {
  return {{"phi0", g.phi0},
          {"phi1", g.phi1},
          {"theta", g.theta},
          {"duration_s", g.envelope.duration},
          {"sigma_s", g.envelope.sigma},
          {"area_rad", g.envelope.area}};
}

TwoColorGate gate_from(const nlohmann::json& j) {
  TwoColorGate g;
  g.phi0 = j.at("phi0");
  g.phi1 = j.at("phi1");
  g.theta = j.at("theta");
  g.envelope = PulseEnvelope::cut_gaussian(j.at("duration_s"), j.at("sigma_s"), j.at("area_rad"));
  return g;
}

std::uint64_t combine(std::string_view tag, std::initializer_list<std::uint64_t> parts) {
  std::string bytes(tag);
  for (auto p : parts) bytes += hex64(p);
  return fnv1a(bytes);
}

/// Index i with grid[i] <= x <= grid[i+1] and the fraction along that cell.
std::pair<std::size_t, double> bracket(const std::vector<double>& coords, double x) {
  const std::size_t n = coords.size();
  if (n < 2) return {0, 0.0};
  auto it = std::upper_bound(coords.begin(), coords.end(), x);
  std::size_t i = it == coords.begin() ? 0 : static_cast<std::size_t>(it - coords.begin()) - 1;
  i = std::min(i, n - 2);
  const double f = (x - coords[i]) / (coords[i + 1] - coords[i]);
  return {i, std::clamp(f, 0.0, 1.0)};
}

/// Bracket on the shift axis with the fraction measured in shift_coordinate.
std::pair<std::size_t, double> bracket_shift(const std::vector<double>& shifts, double x) {
  auto [i, f] = bracket(shifts, x);
  if (shifts.size() < 2) return {i, f};
  const double c0 = shift_coordinate(shifts[i]), c1 = shift_coordinate(shifts[i + 1]);
  return {i, std::clamp((shift_coordinate(x) - c0) / (c1 - c0), 0.0, 1.0)};
}

/// Smallest grid shift on the side of `shift_hz`; 0 when the side is empty.
double first_node(const std::vector<double>& grid, double shift_hz) {
  double best = 0.0;
  for (double s : grid) {
    if (s == 0.0 || (s > 0) != (shift_hz > 0)) continue;
    if (best == 0.0 || std::abs(s) < std::abs(best)) best = s;
  }
  return best;
}

/// Below the first shift node the rotation angle is taken linear in the shift
/// and the length deficit quadratic, the leading orders of a weak perturbation.
ErrorSourceEffect scale_effect(const ErrorSourceEffect& e, double r) {
  ErrorSourceEffect out;
  const Eigen::AngleAxisd aa(e.rotation);
  out.angle = aa.angle() * r;
  out.rotation = Eigen::AngleAxisd(out.angle, aa.axis()).toRotationMatrix();
  out.shrinkage = 1.0 - (1.0 - e.shrinkage) * r * r;
  return out;
}

BlochVector normalized_qubit_bloch(StateVector psi, const std::vector<int>& dims) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw NumericalError("zero state after evolution");
  psi /= n;  // pure evolution: the norm drift is integrator error only
  const QubitState q = reduce_pure(psi, dims, 0, 1);
  return bloch_vector(q.rho);
}

std::array<BlochVector, 3> simulate_inside_states(const LevelScheme& scheme,
                                                  const TwoColorGate& gate, double shift_hz,
                                                  double detuning_hz, const Tolerance& tol) {
  SystemSpec spec;
  spec.scheme = scheme;
  spec.ions = {IonModel::ideal(), IonModel::six_level(detuning_hz, DriveMode::All)};
  spec.shifts_hz = Eigen::MatrixXd::Zero(2, 2);
  spec.shifts_hz(0, 1) = spec.shifts_hz(1, 0) = shift_hz;
  const LocalLevels q = local_levels(spec.ions[0], scheme);
  const StateVector plus = qubit_plus_i(q, 3);
  Eigen::MatrixXcd psi(18, 3);
  for (int g = 0; g < 3; ++g) {
    StateVector ion = StateVector::Zero(6);
    ion[g] = 1.0;
    psi.col(g) = tensor_state({plus, ion});
  }
  const Eigen::MatrixXcd out = apply_gate_pure(psi, spec, gate, tol);
  std::array<BlochVector, 3> r;
  for (int g = 0; g < 3; ++g) r[g] = normalized_qubit_bloch(out.col(g), {3, 6});
  return r;
}

void check_state(int state) {
  if (state < 0 || state > 2) throw std::invalid_argument("initial ground level must be 0, 1 or 2");
}

std::vector<double> split_doubles(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

struct TableFile {
  nlohmann::json header;
  std::vector<std::vector<double>> rows;
};

void write_table(const std::filesystem::path& path, const std::string& kind,
                 const nlohmann::json& header, const std::string& columns,
                 const std::vector<std::vector<double>>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << "# isdsim " << kind << "\n# " << header.dump() << "\n" << columns << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << exact_number(r[i]);
      out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

TableFile read_table(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "# isdsim " + kind) {
    throw MapFormatError(path.string() + ": not an isdsim " + kind + " file");
  }
  TableFile t;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw MapFormatError(path.string() + ": missing header");
  }
  try {
    t.header = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw MapFormatError(path.string() + ": bad header: " + e.what());
  }
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      t.rows.push_back(split_doubles(line));
    } catch (const std::exception&) {
      throw MapFormatError(path.string() + ": bad row: " + line);
    }
  }
  return t;
}

void check_header(const nlohmann::json& h, const std::string& kind, int version) {
  if (h.value("kind", std::string()) != kind || h.value("version", -1) != version) {
    throw MapFormatError("unsupported " + kind + " file version");
  }
}

MapResolution resolution_from(const nlohmann::json& j) {
  MapResolution r;
  r.preset = j.at("preset");
  r.shifts_per_sign = j.at("shifts_per_sign");
  r.shift_min_hz = j.at("shift_min_hz");
  r.shift_max_hz = j.at("shift_max_hz");
  r.detuning_step_hz = j.at("detuning_step_hz");
  r.resonance_offsets_hz = j.at("resonance_offsets_hz").get<std::vector<double>>();
  r.p_points = j.at("p_points");
  r.p_min = j.at("p_min");
  r.p_max = j.at("p_max");
  r.excitation_step_hz = j.at("excitation_step_hz");
  r.excitation_offsets_hz = j.at("excitation_offsets_hz").get<std::vector<double>>();
  r.map_tol = tol_from(j.at("map_tol"));
  r.excitation_tol = tol_from(j.at("excitation_tol"));
  return r;
}

BlochVector bloch_from(const nlohmann::json& j) {
  return BlochVector(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

}  // namespace

MapResolution MapResolution::preset_named(const std::string& name) {
  MapResolution r;
  r.preset = name;
  if (name == "full") {
    r.shifts_per_sign = 81;
    r.detuning_step_hz = 2.5e6;
    r.resonance_offsets_hz = {0.1e6, 0.2e6, 0.4e6, 0.8e6, 1.6e6};
    r.p_points = 33;
    r.excitation_step_hz = 2.5e6;
    r.excitation_offsets_hz = {0.1e6, 0.2e6, 0.4e6, 0.8e6, 1.6e6};
    r.map_tol = {1e-9, 1e-9};
    r.excitation_tol = {1e-9, 1e-11};
  } else if (name == "fast") {
    r.shifts_per_sign = 21;
    r.detuning_step_hz = 10.0e6;
    r.resonance_offsets_hz = {0.25e6, 0.5e6, 1e6, 2e6, 4e6};
    r.p_points = 33;
    r.excitation_step_hz = 10.0e6;
    r.excitation_offsets_hz = {0.25e6, 0.5e6, 1e6, 2e6, 4e6};
  } else if (name == "ci") {
    r.shifts_per_sign = 9;
    r.detuning_step_hz = 25.0e6;
    r.resonance_offsets_hz = {0.5e6, 1e6, 2e6, 4e6, 8e6};
    r.p_points = 17;
    r.excitation_step_hz = 50.0e6;
    r.excitation_offsets_hz = {0.25e6, 0.5e6, 1e6, 2e6, 4e6, 10e6};
    r.excitation_tol = {1e-7, 1e-9};
  } else {
    throw std::invalid_argument("unknown resolution preset '" + name + "' (full, fast, ci)");
  }
  return r;
}

nlohmann::json MapResolution::to_json() const {
  return {{"preset", preset},
          {"shifts_per_sign", shifts_per_sign},
          {"shift_min_hz", shift_min_hz},
          {"shift_max_hz", shift_max_hz},
          {"detuning_step_hz", detuning_step_hz},
          {"resonance_offsets_hz", resonance_offsets_hz},
          {"p_points", p_points},
          {"p_min", p_min},
          {"p_max", p_max},
          {"excitation_step_hz", excitation_step_hz},
          {"excitation_offsets_hz", excitation_offsets_hz},
          {"map_tol", tol_json(map_tol)},
          {"excitation_tol", tol_json(excitation_tol)}};
}

std::uint64_t MapResolution::hash() const { return fnv1a(to_json().dump()); }

std::vector<double> signed_log_grid(int per_sign, double min_hz, double max_hz) {
  if (per_sign < 1 || !(min_hz > 0.0) || !(max_hz >= min_hz)) {
    throw std::invalid_argument("signed_log_grid: bad range");
  }
  std::vector<double> mags;
  for (int k = 0; k < per_sign; ++k) {
    const double f = per_sign == 1 ? 0.0 : static_cast<double>(k) / (per_sign - 1);
    mags.push_back(min_hz * std::pow(max_hz / min_hz, f));
  }
  std::vector<double> g;
  for (auto it = mags.rbegin(); it != mags.rend(); ++it) g.push_back(-*it);
  g.push_back(0.0);
  for (double m : mags) g.push_back(m);
  return g;
}

std::vector<double> resonant_detunings(const LevelScheme& scheme) {
  std::vector<double> out;
  for (int c = 0; c < 2; ++c) {
    for (int g = 0; g < 3; ++g) {
      for (int e = 0; e < 3; ++e) {
        const double d = scheme.color_hz(c) - scheme.transition_hz(g, e);
        if (d >= PopulationProfile::kLow && d <= PopulationProfile::kHigh) out.push_back(d);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) < 1e3; }),
            out.end());
  return out;
}

std::vector<double> channel_detuning_grid(const LevelScheme& scheme, double step_hz,
                                          const std::vector<double>& offsets_hz) {
  if (!(step_hz > 0.0)) throw std::invalid_argument("detuning step must be positive");
  const double lo = PopulationProfile::kLow, hi = PopulationProfile::kHigh;
  std::vector<double> g;
  const auto n = static_cast<long>(std::ceil((hi - lo) / step_hz - 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(std::min(hi, lo + static_cast<double>(i) * step_hz));
  for (double r : resonant_detunings(scheme)) {
    g.push_back(r);
    for (double o : offsets_hz) {
      if (r - o >= lo) g.push_back(r - o);
      if (r + o <= hi) g.push_back(r + o);
    }
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return std::abs(a - b) < 1e3; }),
          g.end());
  return g;
}

ErrorSourceEffect relative_effect(const BlochVector& observed, const BlochVector& reference) {
  const double r = reference.norm();
  if (!(r > 0.0)) throw std::invalid_argument("relative_effect: zero reference");
  return decompose_effect(observed / r, reference / r);
}

BlochVector simulate_inside_point(const LevelScheme& scheme, const TwoColorGate& gate,
                                  double shift_hz, double detuning_hz, int state,
                                  const Tolerance& tol) {
  check_state(state);
  return simulate_inside_states(scheme, gate, shift_hz, detuning_hz, tol)[state];
}

BlochVector simulate_reference(const TwoColorGate& gate, const Tolerance& tol) {
  SystemSpec spec;
  spec.ions = {IonModel::ideal()};
  const LocalLevels q = local_levels(spec.ions[0], spec.scheme);
  const Eigen::MatrixXcd out = apply_gate_pure(qubit_plus_i(q, 3), spec, gate, tol);
  return normalized_qubit_bloch(out.col(0), {3});
}

// ---------------------------------------------------------------------------
// Inside map

std::uint64_t inside_map_key(const MapResolution& res, const LevelScheme& scheme,
                             const TwoColorGate& gate) {
  return combine("inside", {static_cast<std::uint64_t>(InsideMap::kVersion), res.hash(),
                            scheme.hash(), gate.hash()});
}

std::uint64_t InsideMap::key() const { return inside_map_key(resolution, scheme, gate); }

InsideMap generate_inside_map(const MapResolution& res, const LevelScheme& scheme,
                              const TwoColorGate& gate, int workers) {
  InsideMap m;
  m.resolution = res;
  m.scheme = scheme;
  m.gate = gate;
  m.shift_grid = signed_log_grid(res.shifts_per_sign, res.shift_min_hz, res.shift_max_hz);
  m.detuning_grid = channel_detuning_grid(scheme, res.detuning_step_hz, res.resonance_offsets_hz);
  m.reference = simulate_reference(gate, res.map_tol);
  const std::size_t ns = m.shift_grid.size(), nd = m.detuning_grid.size();
  for (auto& v : m.values) v.assign(ns * nd, m.reference);
  parallel_for(ns * nd, workers, [&](std::size_t idx) {
    const std::size_t is = idx / nd, id = idx % nd;
    if (m.shift_grid[is] == 0.0) return;  // no interaction: the neighbor-free result
    const auto r = simulate_inside_states(scheme, gate, m.shift_grid[is], m.detuning_grid[id],
                                          res.map_tol);
    for (int g = 0; g < 3; ++g) m.values[g][idx] = r[g];
  });
  return m;
}

BlochVector InsideMap::interpolate(double shift_hz, double detuning_hz, int state) const {
  check_state(state);
  if (std::abs(shift_hz) > kMaxShift * (1.0 + 1e-12)) {
    throw std::out_of_range("inside map: |shift| beyond the tabulated range");
  }
  if (!(detuning_hz >= detuning_grid.front() && detuning_hz <= detuning_grid.back())) {
    throw std::out_of_range("inside map: detuning outside the channel");
  }
  const auto [is, fs] = bracket_shift(shift_grid, shift_hz);
  const auto [id, fd] = bracket(detuning_grid, detuning_hz);
  return (1 - fs) * ((1 - fd) * at(state, is, id) + fd * at(state, is, id + 1)) +
         fs * ((1 - fd) * at(state, is + 1, id) + fd * at(state, is + 1, id + 1));
}

ErrorSourceEffect InsideMap::query(double shift_hz, double detuning_hz, int state) const {
  check_state(state);
  if (!(detuning_hz >= detuning_grid.front() && detuning_hz <= detuning_grid.back())) {
    throw std::out_of_range("inside map: detuning outside the channel");
  }
  if (shift_hz == 0.0) return ErrorSourceEffect::identity();
  if (std::abs(shift_hz) > kMaxShift) {
    return relative_effect(
        simulate_inside_point(scheme, gate, shift_hz, detuning_hz, state, resolution.map_tol),
        reference);
  }
  const double s1 = first_node(shift_grid, shift_hz);
  if (s1 != 0.0 && std::abs(shift_hz) < std::abs(s1)) {
    return scale_effect(relative_effect(interpolate(s1, detuning_hz, state), reference),
                        shift_hz / s1);
  }
  return relative_effect(interpolate(shift_hz, detuning_hz, state), reference);
}

void InsideMap::validate() const {
  auto monotone = [](const std::vector<double>& g) {
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1])) return false;
    return g.size() >= 2;
  };
  if (!monotone(shift_grid) || !monotone(detuning_grid)) {
    throw MapFormatError("inside map: grids must be strictly increasing");
  }
  for (const auto& v : values) {
    if (v.size() != shift_grid.size() * detuning_grid.size()) {
      throw MapFormatError("inside map: table size mismatch");
    }
    for (const auto& a : v) {
      if (!(a.norm() <= 1.0 + 1e-6)) throw MapFormatError("inside map: Bloch vector longer than 1");
    }
  }
}

void InsideMap::save(const std::filesystem::path& path) const {
  nlohmann::json h{{"kind", "inside"},
                   {"version", kVersion},
                   {"tool_version", ISDSIM_VERSION},
                   {"key", hex64(key())},
                   {"resolution", resolution.to_json()},
                   {"scheme", scheme.to_json()},
                   {"gate", gate_json(gate)},
                   {"reference", {reference.x(), reference.y(), reference.z()}},
                   {"shift_count", shift_grid.size()},
                   {"detuning_count", detuning_grid.size()}};
  std::vector<std::vector<double>> rows;
  for (int g = 0; g < 3; ++g)
    for (std::size_t is = 0; is < shift_grid.size(); ++is)
      for (std::size_t id = 0; id < detuning_grid.size(); ++id) {
        const auto& a = at(g, is, id);
        rows.push_back({static_cast<double>(g), shift_grid[is], detuning_grid[id], a.x(), a.y(), a.z()});
      }
  write_table(path, "inside-map", h, "state,shift_hz,detuning_hz,u,v,w", rows);
}

InsideMap InsideMap::load(const std::filesystem::path& path) {
  const TableFile t = read_table(path, "inside-map");
  check_header(t.header, "inside", kVersion);
  InsideMap m;
  try {
    m.resolution = resolution_from(t.header.at("resolution"));
    m.scheme = LevelScheme::from_json(t.header.at("scheme"));
    m.gate = gate_from(t.header.at("gate"));
    m.reference = bloch_from(t.header.at("reference"));
  } catch (const nlohmann::json::exception& e) {
    throw MapFormatError(path.string() + ": " + e.what());
  }
  if (hex64(m.key()) != t.header.value("key", std::string())) {
    throw MapFormatError(path.string() + ": key does not match its contents");
  }
  const std::size_t ns = t.header.at("shift_count"), nd = t.header.at("detuning_count");
  if (t.rows.size() != 3 * ns * nd) throw MapFormatError(path.string() + ": truncated table");
  m.shift_grid.resize(ns);
  m.detuning_grid.resize(nd);
  for (auto& v : m.values) v.resize(ns * nd);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    if (r.size() != 6) throw MapFormatError(path.string() + ": bad row width");
    const std::size_t g = k / (ns * nd), idx = k % (ns * nd);
    if (static_cast<std::size_t>(r[0]) != g) throw MapFormatError(path.string() + ": rows out of order");
    m.shift_grid[idx / nd] = r[1];
    m.detuning_grid[idx % nd] = r[2];
    m.values[g][idx] = {r[3], r[4], r[5]};
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Excitation curves

std::array<double, 2> simulate_excitation(const LevelScheme& scheme, const TwoColorGate& gate,
                                          double detuning_hz, int ground, const Tolerance& tol) {
  check_state(ground);
  SystemSpec spec;
  spec.scheme = scheme;
  spec.ions = {IonModel::six_level(detuning_hz, DriveMode::All)};
  spec.colors_hz = std::array<double, 2>{scheme.color_hz(0), scheme.color_hz(1)};
  const Hamiltonian h = build_hamiltonian(spec);
  const int last = ExcitationCurves::kGates[1];
  const PulseTrain train = PulseTrain::gates(gate, last);
  DensityMatrix rho = DensityMatrix::Zero(6, 6);
  rho(ground, ground) = 1.0;
  const auto lindblad = LindbladParams::europium();
  auto excited = [](const DensityMatrix& r) { return (r(3, 3) + r(4, 4) + r(5, 5)).real(); };
  std::array<double, 2> out{};
  double t = 0.0;
  for (int s = 0; s < 2; ++s) {
    const double t1 = ExcitationCurves::kGates[s] * gate.duration();
    rho = evolve(h, train, rho, t, t1, lindblad, tol);
    t = t1;
    out[s] = std::clamp(excited(rho), 0.0, 1.0);
  }
  return out;
}

std::uint64_t excitation_curves_key(const MapResolution& res, const LevelScheme& scheme,
                                    const TwoColorGate& gate) {
  return combine("excitation", {static_cast<std::uint64_t>(ExcitationCurves::kVersion),
                                fnv1a(nlohmann::json{res.excitation_step_hz, res.excitation_offsets_hz,
                                                     tol_json(res.excitation_tol)}
                                          .dump()),
                                scheme.hash(), gate.hash()});
}

std::uint64_t ExcitationCurves::key() const { return excitation_curves_key(resolution, scheme, gate); }

int ExcitationCurves::slot(int gates) {
  for (int s = 0; s < 2; ++s)
    if (kGates[s] == gates) return s;
  throw std::invalid_argument("excitation curves exist for 1 and 10 gates only");
}

ExcitationCurves generate_excitation_curves(const MapResolution& res, const LevelScheme& scheme,
                                            const TwoColorGate& gate, int workers) {
  ExcitationCurves c;
  c.resolution = res;
  c.scheme = scheme;
  c.gate = gate;
  c.detuning_grid = channel_detuning_grid(scheme, res.excitation_step_hz, res.excitation_offsets_hz);
  const std::size_t nd = c.detuning_grid.size();
  for (auto& s : c.excited)
    for (auto& g : s) g.assign(nd, 0.0);
  parallel_for(3 * nd, workers, [&](std::size_t idx) {
    const int g = static_cast<int>(idx / nd);
    const std::size_t id = idx % nd;
    const auto r = simulate_excitation(scheme, gate, c.detuning_grid[id], g, res.excitation_tol);
    c.excited[0][g][id] = r[0];
    c.excited[1][g][id] = r[1];
  });
  return c;
}

double ExcitationCurves::per_ground(int gates, int ground, double detuning_hz) const {
  check_state(ground);
  if (!(detuning_hz >= detuning_grid.front() && detuning_hz <= detuning_grid.back())) {
    throw std::out_of_range("excitation curve: detuning outside the channel");
  }
  const auto& y = excited[slot(gates)][ground];
  const auto [i, f] = bracket(detuning_grid, detuning_hz);
  // The curves fall by decades between resonances; interpolating the
  // logarithm keeps a sparse grid from smearing peaks into the gaps.
  if (y[i] > 0.0 && y[i + 1] > 0.0) return std::exp((1 - f) * std::log(y[i]) + f * std::log(y[i + 1]));
  return (1 - f) * y[i] + f * y[i + 1];
}

double ExcitationCurves::excited_population(int gates, double detuning_hz,
                                            const PopulationProfile* profile) const {
  if (gates == 0) return 0.0;
  const std::array<double, 3> w = profile ? profile->ground_probabilities(detuning_hz)
                                          : std::array<double, 3>{1.0 / 3, 1.0 / 3, 1.0 / 3};
  double p = 0.0;
  for (int g = 0; g < 3; ++g) p += w[g] * per_ground(gates, g, detuning_hz);
  return std::clamp(p, 0.0, 1.0);
}

void ExcitationCurves::validate() const {
  for (std::size_t i = 1; i < detuning_grid.size(); ++i) {
    if (!(detuning_grid[i] > detuning_grid[i - 1])) {
      throw MapFormatError("excitation curves: grid must be strictly increasing");
    }
  }
  for (const auto& s : excited)
    for (const auto& g : s) {
      if (g.size() != detuning_grid.size()) throw MapFormatError("excitation curves: size mismatch");
      for (double v : g)
        if (!(v >= 0.0 && v <= 1.0)) throw MapFormatError("excitation curves: population outside [0, 1]");
    }
}

void ExcitationCurves::save(const std::filesystem::path& path) const {
  nlohmann::json h{{"kind", "excitation"},
                   {"version", kVersion},
                   {"tool_version", ISDSIM_VERSION},
                   {"key", hex64(key())},
                   {"resolution", resolution.to_json()},
                   {"scheme", scheme.to_json()},
                   {"gate", gate_json(gate)},
                   {"lindblad", lindblad},
                   {"detuning_count", detuning_grid.size()}};
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < detuning_grid.size(); ++i) {
    rows.push_back({detuning_grid[i], excited[0][0][i], excited[0][1][i], excited[0][2][i],
                    excited[1][0][i], excited[1][1][i], excited[1][2][i]});
  }
  write_table(path, "excitation-curves", h,
              "detuning_hz,g1_s0,g1_s1,g1_s2,g10_s0,g10_s1,g10_s2", rows);
}

ExcitationCurves ExcitationCurves::load(const std::filesystem::path& path) {
  const TableFile t = read_table(path, "excitation-curves");
  check_header(t.header, "excitation", kVersion);
  ExcitationCurves c;
  try {
    c.resolution = resolution_from(t.header.at("resolution"));
    c.scheme = LevelScheme::from_json(t.header.at("scheme"));
    c.gate = gate_from(t.header.at("gate"));
    c.lindblad = t.header.at("lindblad");
  } catch (const nlohmann::json::exception& e) {
    throw MapFormatError(path.string() + ": " + e.what());
  }
  if (hex64(c.key()) != t.header.value("key", std::string())) {
    throw MapFormatError(path.string() + ": key does not match its contents");
  }
  for (const auto& r : t.rows) {
    if (r.size() != 7) throw MapFormatError(path.string() + ": bad row width");
    c.detuning_grid.push_back(r[0]);
    for (int s = 0; s < 2; ++s)
      for (int g = 0; g < 3; ++g) c.excited[s][g].push_back(r[1 + 3 * s + g]);
  }
  if (c.detuning_grid.size() != t.header.at("detuning_count").get<std::size_t>()) {
    throw MapFormatError(path.string() + ": truncated table");
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Outside map

BlochVector simulate_outside_excited(const TwoColorGate& gate, double shift_hz,
                                     const Tolerance& tol) {
  SystemSpec spec;
  spec.ions = {IonModel::ideal(), IonModel::idle_two_level()};
  spec.shifts_hz = Eigen::MatrixXd::Zero(2, 2);
  spec.shifts_hz(0, 1) = spec.shifts_hz(1, 0) = shift_hz;
  const LocalLevels q = local_levels(spec.ions[0], spec.scheme);
  StateVector up = StateVector::Zero(2);
  up[1] = 1.0;
  const Eigen::MatrixXcd out =
      apply_gate_pure(tensor_state({qubit_plus_i(q, 3), up}), spec, gate, tol);
  return normalized_qubit_bloch(out.col(0), {3, 2});
}

std::uint64_t outside_map_key(const MapResolution& res, const TwoColorGate& gate) {
  return combine("outside",
                 {static_cast<std::uint64_t>(OutsideMap::kVersion),
                  fnv1a(nlohmann::json{res.shifts_per_sign, res.shift_min_hz, res.shift_max_hz,
                                       res.p_points, res.p_min, res.p_max, tol_json(res.map_tol)}
                            .dump()),
                  gate.hash()});
}

std::uint64_t OutsideMap::key() const { return outside_map_key(resolution, gate); }

OutsideMap generate_outside_map(const MapResolution& res, const TwoColorGate& gate, int workers) {
  if (res.p_points < 2 || !(res.p_min > 0.0) || !(res.p_max > res.p_min) || res.p_max > 1.0) {
    throw std::invalid_argument("outside map: bad excitation axis");
  }
  OutsideMap m;
  m.resolution = res;
  m.gate = gate;
  m.shift_grid = signed_log_grid(res.shifts_per_sign, res.shift_min_hz, res.shift_max_hz);
  m.p_grid.push_back(0.0);
  for (int k = 0; k < res.p_points; ++k) {
    m.p_grid.push_back(res.p_min * std::pow(res.p_max / res.p_min, static_cast<double>(k) / (res.p_points - 1)));
  }
  // The idle ion starts in the mixture (1-p)|g><g| + p|e><e| and the evolution is
  // linear in the initial state, so one fully excited run per shift fixes every p.
  std::vector<BlochVector> excited(m.shift_grid.size(), m.target);
  parallel_for(m.shift_grid.size(), workers, [&](std::size_t is) {
    if (m.shift_grid[is] != 0.0) excited[is] = simulate_outside_excited(gate, m.shift_grid[is], res.map_tol);
  });
  m.values.resize(m.shift_grid.size() * m.p_grid.size());
  for (std::size_t is = 0; is < m.shift_grid.size(); ++is)
    for (std::size_t ip = 0; ip < m.p_grid.size(); ++ip) {
      const double p = m.p_grid[ip];
      m.values[is * m.p_grid.size() + ip] = ip == 0 ? m.target : BlochVector((1 - p) * m.target + p * excited[is]);
    }
  return m;
}

BlochVector OutsideMap::interpolate(double shift_hz, double p) const {
  if (!(p >= 0.0)) throw std::out_of_range("outside map: negative excited population");
  if (p > p_grid.back() * (1.0 + 1e-12)) throw std::out_of_range("outside map: p above the table");
  const double s = std::clamp(shift_hz, -kMaxShift, kMaxShift);
  const auto [is, fs] = bracket_shift(shift_grid, s);
  const auto [ip, fp] = bracket(p_grid, p);
  return (1 - fs) * ((1 - fp) * at(is, ip) + fp * at(is, ip + 1)) +
         fs * ((1 - fp) * at(is + 1, ip) + fp * at(is + 1, ip + 1));
}

ErrorSourceEffect OutsideMap::query(double shift_hz, double p) const {
  if (!(p >= 0.0)) throw std::out_of_range("outside map: negative excited population");
  if (p == 0.0 || shift_hz == 0.0) {
    if (p > p_grid.back() * (1.0 + 1e-12)) throw std::out_of_range("outside map: p above the table");
    return ErrorSourceEffect::identity();
  }
  const double s = std::clamp(shift_hz, -kMaxShift, kMaxShift);
  const double s1 = first_node(shift_grid, s);
  if (s1 != 0.0 && std::abs(s) < std::abs(s1)) {
    return scale_effect(relative_effect(interpolate(s1, p), target), s / s1);
  }
  return relative_effect(interpolate(s, p), target);
}

void OutsideMap::validate() const {
  for (std::size_t i = 1; i < shift_grid.size(); ++i)
    if (!(shift_grid[i] > shift_grid[i - 1])) throw MapFormatError("outside map: shift grid not increasing");
  for (std::size_t i = 1; i < p_grid.size(); ++i)
    if (!(p_grid[i] > p_grid[i - 1])) throw MapFormatError("outside map: p grid not increasing");
  if (p_grid.empty() || p_grid[0] != 0.0) throw MapFormatError("outside map: p grid must start at 0");
  if (values.size() != shift_grid.size() * p_grid.size()) throw MapFormatError("outside map: size mismatch");
  for (std::size_t is = 0; is < shift_grid.size(); ++is) {
    if (at(is, 0) != target) throw MapFormatError("outside map: p = 0 row differs from the target");
  }
  for (const auto& a : values)
    if (!(a.norm() <= 1.0 + 1e-6)) throw MapFormatError("outside map: Bloch vector longer than 1");
}

void OutsideMap::save(const std::filesystem::path& path) const {
  nlohmann::json h{{"kind", "outside"},
                   {"version", kVersion},
                   {"tool_version", ISDSIM_VERSION},
                   {"key", hex64(key())},
                   {"resolution", resolution.to_json()},
                   {"gate", gate_json(gate)},
                   {"target", {target.x(), target.y(), target.z()}},
                   {"shift_count", shift_grid.size()},
                   {"p_count", p_grid.size()}};
  std::vector<std::vector<double>> rows;
  for (std::size_t is = 0; is < shift_grid.size(); ++is)
    for (std::size_t ip = 0; ip < p_grid.size(); ++ip) {
      const auto& a = at(is, ip);
      rows.push_back({shift_grid[is], p_grid[ip], a.x(), a.y(), a.z()});
    }
  write_table(path, "outside-map", h, "shift_hz,p,u,v,w", rows);
}

OutsideMap OutsideMap::load(const std::filesystem::path& path) {
  const TableFile t = read_table(path, "outside-map");
  check_header(t.header, "outside", kVersion);
  OutsideMap m;
  try {
    m.resolution = resolution_from(t.header.at("resolution"));
    m.gate = gate_from(t.header.at("gate"));
    m.target = bloch_from(t.header.at("target"));
  } catch (const nlohmann::json::exception& e) {
    throw MapFormatError(path.string() + ": " + e.what());
  }
  if (hex64(m.key()) != t.header.value("key", std::string())) {
    throw MapFormatError(path.string() + ": key does not match its contents");
  }
  const std::size_t ns = t.header.at("shift_count"), np = t.header.at("p_count");
  if (t.rows.size() != ns * np) throw MapFormatError(path.string() + ": truncated table");
  m.shift_grid.resize(ns);
  m.p_grid.resize(np);
  m.values.resize(ns * np);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    if (r.size() != 5) throw MapFormatError(path.string() + ": bad row width");
    m.shift_grid[k / np] = r[0];
    m.p_grid[k % np] = r[1];
    m.values[k] = {r[2], r[3], r[4]};
  }
  m.validate();
  return m;
}

}  // namespace isd

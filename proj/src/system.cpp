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

#include "isd/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace isd {

int IonModel::level_count() const {
  switch (kind) {
    case IonKind::TwoLevel:
      return 2;
    case IonKind::ThreeLevel:
      return 3;
    case IonKind::SixLevel:
      return 6;
  }
  return 0;
}

LocalLevels local_levels(const IonModel& ion, const LevelScheme& scheme) {
  LocalLevels out;
  const bool driven = ion.drive != DriveMode::None;
  const bool all = ion.drive == DriveMode::All;
  switch (ion.kind) {
    case IonKind::TwoLevel:
      out.energy_hz = {0.0, ion.detuning_hz};
      out.bare_hz = {0.0, ion.detuning_hz};
      out.excited = {false, true};
      out.zero = 0;
      out.one = -1;
      out.transitions.push_back({0, 1, {driven ? 1.0 : 0.0, 0.0}, 1.0});
      break;
    case IonKind::ThreeLevel: {
      out.energy_hz = {0.0, 0.0, ion.detuning_hz};
      out.bare_hz = {0.0, -ion.ground_splitting_hz, ion.detuning_hz};
      out.excited = {false, false, true};
      out.zero = 0;
      out.one = 1;
      const double on = driven ? 1.0 : 0.0;
      const double off = all ? 1.0 : 0.0;
      out.transitions.push_back({0, 2, {on, off}, 0.5});
      out.transitions.push_back({1, 2, {off, on}, 0.5});
      break;
    }
    case IonKind::SixLevel: {
      for (int g = 0; g < 3; ++g) {
        out.energy_hz.push_back(0.0);
        out.bare_hz.push_back(scheme.ground_hz[g]);
        out.excited.push_back(false);
      }
      for (int e = 0; e < 3; ++e) {
        out.energy_hz.push_back(ion.detuning_hz + scheme.excited_hz[e]);
        out.bare_hz.push_back(ion.detuning_hz + scheme.excited_hz[e]);
        out.excited.push_back(true);
      }
      out.zero = scheme.roles.zero;
      out.one = scheme.roles.one;
      const std::array<double, 2> design{scheme.design_strength(0), scheme.design_strength(1)};
      for (int g = 0; g < 3; ++g) {
        for (int e = 0; e < 3; ++e) {
          std::array<double, 2> s{0.0, 0.0};
          const double f = scheme.strength(g, e);
          if (all) {
            s = {std::sqrt(f / design[0]), std::sqrt(f / design[1])};
          } else if (driven && e == scheme.roles.excited) {
            if (g == scheme.roles.zero) s[0] = 1.0;
            if (g == scheme.roles.one) s[1] = 1.0;
          }
          out.transitions.push_back({g, 3 + e, s, scheme.branching(g, e)});
        }
      }
      break;
    }
  }
  return out;
}

std::vector<int> strides(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int m = static_cast<int>(dims.size()) - 2; m >= 0; --m) s[m] = s[m + 1] * dims[m + 1];
  return s;
}

namespace {

int rate_index(std::vector<double>& rates, double r) {
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] == r) return static_cast<int>(i);
  }
  rates.push_back(r);
  return static_cast<int>(rates.size()) - 1;
}

}  // namespace

Hamiltonian build_hamiltonian(const SystemSpec& spec) {
  const int n = static_cast<int>(spec.ions.size());
  if (n == 0) throw std::invalid_argument("build_hamiltonian: no ions");
  if (n > 31) throw DimensionError("build_hamiltonian: too many ions");
  std::size_t total = 1;
  std::vector<int> dims;
  for (const auto& ion : spec.ions) {
    dims.push_back(ion.level_count());
    total *= static_cast<std::size_t>(ion.level_count());
    if (total > spec.dimension_cap) {
      throw DimensionError("build_hamiltonian: composite dimension exceeds cap of " +
                           std::to_string(spec.dimension_cap));
    }
  }
  Eigen::MatrixXd shifts = spec.shifts_hz;
  if (shifts.size() == 0) shifts = Eigen::MatrixXd::Zero(n, n);
  if (shifts.rows() != n || shifts.cols() != n) {
    throw std::invalid_argument("build_hamiltonian: shift table must be " + std::to_string(n) +
                                "x" + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (shifts(i, j) != shifts(j, i)) {
        throw std::invalid_argument("build_hamiltonian: shift table is not symmetric");
      }
    }
  }

  std::vector<LocalLevels> local;
  for (const auto& ion : spec.ions) local.push_back(local_levels(ion, spec.scheme));

  Hamiltonian h;
  h.dims = dims;
  const int dim = static_cast<int>(total);
  const auto stride = strides(dims);

  // Colors follow the qubit: color 0 on its |0>-|e>, color 1 on its |1>-|e>.
  const auto& q = local.front();
  h.colors_hz = {0.0, 0.0};
  if (q.one >= 0) {
    const int qe = spec.ions.front().kind == IonKind::SixLevel ? 3 + spec.scheme.roles.excited
                                                                : dims.front() - 1;
    h.colors_hz[0] = q.bare_hz[qe] - q.bare_hz[q.zero];
    h.colors_hz[1] = q.bare_hz[qe] - q.bare_hz[q.one];
  }
  if (spec.colors_hz) h.colors_hz = *spec.colors_hz;

  h.diag_hz = Eigen::VectorXd::Zero(dim);
  h.excited_mask.assign(dim, 0u);
  std::vector<int> level(n);
  for (int a = 0; a < dim; ++a) {
    int rem = a;
    std::uint32_t mask = 0;
    double e = 0.0;
    for (int m = 0; m < n; ++m) {
      level[m] = rem / stride[m];
      rem %= stride[m];
      e += local[m].energy_hz[level[m]];
      if (local[m].excited[level[m]]) mask |= 1u << m;
    }
    for (int i = 0; i < n; ++i) {
      if (!(mask >> i & 1u)) continue;
      for (int j = i + 1; j < n; ++j) {
        if (mask >> j & 1u) e += shifts(i, j);
      }
    }
    h.diag_hz[a] = e;
    h.excited_mask[a] = mask;
  }

  for (int m = 0; m < n; ++m) {
    const auto& lv = local[m];
    for (const auto& tr : lv.transitions) {
      DecayChannel channel{tr.branching, {}};
      for (int a = 0; a < dim; ++a) {
        if ((a / stride[m]) % dims[m] != tr.ground) continue;
        const int upper = a + (tr.excited - tr.ground) * stride[m];
        channel.map.emplace_back(upper, a);
        for (int c = 0; c < 2; ++c) {
          if (tr.strength[c] == 0.0) continue;
          const double rate = -lv.bare_hz[tr.ground] - h.colors_hz[c];
          h.couplings.push_back({upper, a, c, tr.strength[c], rate_index(h.rates_hz, rate)});
        }
      }
      if (tr.branching > 0.0) h.decay.push_back(std::move(channel));
    }
  }
  return h;
}

Eigen::MatrixXcd Hamiltonian::matrix(double t, const PulseTrain& train) const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim(), dim());
  for (int a = 0; a < dim(); ++a) m(a, a) = two_pi * diag_hz[a];
  const auto drive = train.drive(t);
  for (const auto& c : couplings) {
    const std::complex<double> v =
        0.5 * c.strength * drive[c.color] * std::polar(1.0, two_pi * rates_hz[c.rate] * t);
    m(c.upper, c.lower) += v;
    m(c.lower, c.upper) += std::conj(v);
  }
  return m;
}

DensityMatrix tensor_density(const std::vector<DensityMatrix>& factors) {
  DensityMatrix out = DensityMatrix::Ones(1, 1);
  for (const auto& f : factors) {
    DensityMatrix next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
      }
    }
    out = std::move(next);
  }
  return out;
}

StateVector tensor_state(const std::vector<StateVector>& factors) {
  StateVector out = StateVector::Ones(1);
  for (const auto& f : factors) {
    StateVector next(out.size() * f.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * f.size(), f.size()) = out[i] * f;
    out = std::move(next);
  }
  return out;
}

StateVector qubit_plus_i(const LocalLevels& qubit, int levels) {
  if (qubit.one < 0) throw std::invalid_argument("qubit_plus_i: ion has no |1> level");
  StateVector v = StateVector::Zero(levels);
  v[qubit.zero] = 1.0 / std::numbers::sqrt2;
  v[qubit.one] = std::complex<double>(0.0, 1.0 / std::numbers::sqrt2);
  return v;
}

}  // namespace isd

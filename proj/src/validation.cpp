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

#include "isd/validation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "isd/csv.hpp"
#include "isd/evolve.hpp"
#include "isd/monte_carlo.hpp"
#include "isd/parallel.hpp"
#include "isd/rng.hpp"
#include "isd/system.hpp"

namespace isd {

std::string study_name(Study s) {
  switch (s) {
    case Study::Crosstalk:
      return "crosstalk";
    case Study::Decay:
      return "decay";
    case Study::MultiIon:
      return "multi-ion";
  }
  return "?";
}

Study parse_study(const std::string& name) {
  if (name == "crosstalk") return Study::Crosstalk;
  if (name == "decay") return Study::Decay;
  if (name == "multi-ion" || name == "multi") return Study::MultiIon;
  throw std::invalid_argument("unknown study '" + name + "' (crosstalk, decay, multi-ion)");
}

void RandomSystemSpec::validate() const {
  if (ions.empty() || n() > kMaxIons) {
    throw std::invalid_argument("random system: 1 to " + std::to_string(kMaxIons) + " non-qubit ions");
  }
  if (shifts_hz.rows() != n() + 1 || shifts_hz.cols() != n() + 1) {
    throw std::invalid_argument("random system: shift table must be (n+1)x(n+1)");
  }
  for (const auto& ion : ions) {
    if (!ion.driven && !(ion.excited_population >= 0.0 && ion.excited_population <= 1.0)) {
      throw std::invalid_argument("random system: excited population outside [0, 1]");
    }
  }
}

RandomSystemSpec random_system(Study study, int n, std::uint64_t seed, std::uint64_t case_index) {
  if (n < 1 || n > RandomSystemSpec::kMaxIons) {
    throw std::invalid_argument("random system: n must lie in 1.." +
                                std::to_string(RandomSystemSpec::kMaxIons));
  }
  const std::uint64_t stream_seed =
      splitmix64(seed ^ (static_cast<std::uint64_t>(study) << 8) ^ static_cast<std::uint64_t>(n));
  CounterRng rng(stream_seed, case_index, Stream::Validation);
  RandomSystemSpec s;
  s.study = study;
  for (int i = 0; i < n; ++i) {
    RandomIon ion;
    ion.driven = rng.bernoulli(0.5);
    ion.detuning_hz = rng.log_uniform(1.0e3, 1.0e8);
    ion.excited_population = rng.log_uniform(1.0e-9, 1.0e-4);
    s.ions.push_back(ion);
  }
  s.shifts_hz = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) s.shifts_hz(i, j) = s.shifts_hz(j, i) = rng.log_uniform(1.0e2, 1.0e7);
  s.ground_splitting_hz = rng.log_uniform(1.0e5, 1.0e8);
  s.t1 = rng.log_uniform(1.0e-7, 1.0);
  // Keep the europium ratio of optical coherence time to lifetime.
  s.t2 = s.t1 * (2.6e-3 / 1.9e-3);
  return s;
}

BlochVector simulate_random_system(const RandomSystemSpec& spec, const SimulationOptions& o) {
  spec.validate();
  const DriveMode drive = o.crosstalk ? DriveMode::All : DriveMode::Intended;
  SystemSpec sys;
  sys.dimension_cap = 1024;
  sys.ions.push_back({IonKind::ThreeLevel, 0.0, drive, spec.ground_splitting_hz});
  std::vector<int> index{0};
  for (int k : o.ions) {
    if (k < 0 || k >= spec.n()) throw std::invalid_argument("simulate_random_system: bad ion index");
    const RandomIon& ion = spec.ions[k];
    sys.ions.push_back(ion.driven ? IonModel{IonKind::ThreeLevel, ion.detuning_hz, drive, spec.ground_splitting_hz}
                                  : IonModel::idle_two_level());
    index.push_back(k + 1);
  }
  const int m = static_cast<int>(index.size());
  sys.shifts_hz = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) sys.shifts_hz(i, j) = spec.shifts_hz(index[i], index[j]);

  const LocalLevels q = local_levels(sys.ions[0], sys.scheme);
  const StateVector plus = qubit_plus_i(q, 3);
  std::vector<int> dims;
  for (const auto& ion : sys.ions) dims.push_back(ion.level_count());
  const TwoColorGate gate = TwoColorGate::not_gate();

  if (o.decay) {
    std::vector<DensityMatrix> factors{plus * plus.adjoint()};
    for (int k : o.ions) {
      const RandomIon& ion = spec.ions[k];
      if (ion.driven) {
        factors.push_back(plus * plus.adjoint());
      } else {
        DensityMatrix r = DensityMatrix::Zero(2, 2);
        r(0, 0) = 1.0 - ion.excited_population;
        r(1, 1) = ion.excited_population;
        factors.push_back(r);
      }
    }
    const LindbladParams lindblad{true, spec.t1, spec.t2};
    const DensityMatrix out = apply_gate(tensor_density(factors), sys, gate, lindblad, o.tol);
    return bloch_vector(reduce_to_qubit(out, dims, q.zero, q.one).rho);
  }

  // Idle ions start mixed; evolve every excitation pattern as its own pure state.
  std::vector<int> idle;
  for (std::size_t i = 0; i < o.ions.size(); ++i)
    if (!spec.ions[o.ions[i]].driven) idle.push_back(static_cast<int>(i));
  const std::size_t branches = std::size_t{1} << idle.size();
  int dim = 1;
  for (int d : dims) dim *= d;
  Eigen::MatrixXcd psi(dim, static_cast<Eigen::Index>(branches));
  std::vector<double> weight(branches, 1.0);
  for (std::size_t b = 0; b < branches; ++b) {
    std::vector<StateVector> factors{plus};
    std::size_t bit = 0;
    for (std::size_t i = 0; i < o.ions.size(); ++i) {
      const RandomIon& ion = spec.ions[o.ions[i]];
      if (ion.driven) {
        factors.push_back(plus);
      } else {
        const bool up = (b >> bit++) & 1u;
        StateVector v = StateVector::Zero(2);
        v[up ? 1 : 0] = 1.0;
        weight[b] *= up ? ion.excited_population : 1.0 - ion.excited_population;
        factors.push_back(v);
      }
    }
    psi.col(static_cast<Eigen::Index>(b)) = tensor_state(factors);
  }
  const Eigen::MatrixXcd out = apply_gate_pure(psi, sys, gate, o.tol);
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
  for (std::size_t b = 0; b < branches; ++b) {
    StateVector col = out.col(static_cast<Eigen::Index>(b));
    col /= col.norm();  // pure evolution: norm drift is integrator error only
    rho += weight[b] * reduce_pure(col, dims, q.zero, q.one).rho;
  }
  return bloch_vector(rho);
}

namespace {

void set_ratio(CaseResult& r) {
  constexpr double kTiny = 1e-12;
  if (r.qbies_error < kTiny) {
    if (r.full_error < kTiny) {
      r.zero_over_zero = true;
      r.ratio = 1.0;
    } else {
      r.excluded = true;
      r.ratio = std::numeric_limits<double>::infinity();
    }
    return;
  }
  r.ratio = r.full_error / r.qbies_error;
}

}  // namespace

CaseResult run_case(const RandomSystemSpec& spec, std::uint64_t index, const Tolerance& tol) {
  spec.validate();
  const BlochVector target = not_target_bloch();
  CaseResult r;
  r.index = index;
  r.study = spec.study;
  r.n = spec.n();
  SimulationOptions full;
  full.tol = tol;
  for (int i = 0; i < spec.n(); ++i) full.ions.push_back(i);
  SimulationOptions alone = full;
  alone.ions.clear();
  BlochVector estimate;
  switch (spec.study) {
    case Study::Crosstalk:
    case Study::Decay: {
      if (spec.n() != 1) throw std::invalid_argument("crosstalk and decay studies use one ion");
      const bool ct = spec.study == Study::Crosstalk;
      full.crosstalk = alone.crosstalk = ct;
      full.decay = alone.decay = !ct;
      SimulationOptions isd_only = full;
      isd_only.crosstalk = isd_only.decay = false;
      const BlochVector a0 = simulate_random_system(spec, alone);
      const auto effect = decompose_effect(simulate_random_system(spec, isd_only), target);
      estimate = effect.apply(a0);
      break;
    }
    case Study::MultiIon: {
      const BlochVector a0 = simulate_random_system(spec, alone);
      std::vector<ErrorSourceEffect> effects;
      for (int i = 0; i < spec.n(); ++i) {
        SimulationOptions one = alone;
        one.ions = {i};
        effects.push_back(decompose_effect(simulate_random_system(spec, one), target));
      }
      estimate = qbies_compose(effects, a0);
      break;
    }
  }
  r.full_error = error_from_bloch(simulate_random_system(spec, full), target);
  r.qbies_error = error_from_bloch(estimate, target);
  set_ratio(r);
  return r;
}

StudySummary summarize(Study study, int n, const std::vector<CaseResult>& cases) {
  StudySummary s;
  s.study = study;
  s.n = n;
  s.cases = cases.size();
  std::vector<double> ratios, low;
  std::size_t dev_high = 0, dev_low = 0, low_cases = 0;
  for (const auto& c : cases) {
    if (c.zero_over_zero) ++s.zero_over_zero;
    if (c.excluded) {
      ++s.excluded;
      continue;
    }
    ratios.push_back(c.ratio);
    const bool deviates = std::abs(c.ratio - 1.0) > 0.05;
    if (c.full_error > 1e-2) {
      ++s.high_error_cases;
      dev_high += deviates;
    } else {
      ++low_cases;
      dev_low += deviates;
    }
    if (c.full_error < 1e-4) low.push_back(c.ratio);
  }
  s.included = ratios.size();
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    s.median_ratio = quantile(ratios, 0.5);
  }
  s.low_error_cases = low.size();
  if (!low.empty()) {
    std::sort(low.begin(), low.end());
    s.low_error_median = quantile(low, 0.5);
  }
  if (s.high_error_cases) s.deviation_rate_high = static_cast<double>(dev_high) / s.high_error_cases;
  if (low_cases) s.deviation_rate_low = static_cast<double>(dev_low) / low_cases;
  return s;
}

StudyResult validate_study(Study study, int n, int cases, std::uint64_t seed, int workers,
                           const Tolerance& tol) {
  if (cases < 1) throw std::invalid_argument("validate: cases must be at least 1");
  if (study != Study::MultiIon && n != 1) throw std::invalid_argument("validate: this study uses one ion");
  StudyResult out;
  out.cases.resize(static_cast<std::size_t>(cases));
  parallel_for(out.cases.size(), workers, [&](std::size_t i) {
    out.cases[i] = run_case(random_system(study, n, seed, i), i, tol);
  });
  out.summary = summarize(study, n, out.cases);
  return out;
}

void write_validation_csv(const std::filesystem::path& path, const std::vector<CaseResult>& cases,
                          const std::string& config_hash) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# isdsim " << ISDSIM_VERSION << " config_hash=" << config_hash << "\n";
  out << "case,study,n,total_error,qbies_error,ratio,zero_over_zero,excluded\n";
  for (const auto& c : cases) {
    out << c.index << ',' << study_name(c.study) << ',' << c.n << ',' << csv_number(c.full_error)
        << ',' << csv_number(c.qbies_error) << ',' << csv_number(c.ratio) << ','
        << (c.zero_over_zero ? 1 : 0) << ',' << (c.excluded ? 1 : 0) << '\n';
  }
}

GroupComparison compare_driven_ions(const std::vector<double>& detunings_hz,
                                    const std::vector<double>& shifts_hz, const Tolerance& tol) {
  if (detunings_hz.size() != shifts_hz.size() || detunings_hz.empty()) {
    throw std::invalid_argument("compare_driven_ions: one detuning and one shift per ion");
  }
  const int n = static_cast<int>(detunings_hz.size());
  RandomSystemSpec spec;
  spec.study = Study::MultiIon;
  for (double d : detunings_hz) spec.ions.push_back({true, d, 0.0});
  spec.shifts_hz = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i < n; ++i) spec.shifts_hz(0, i + 1) = spec.shifts_hz(i + 1, 0) = shifts_hz[i];
  const BlochVector target = not_target_bloch();
  SimulationOptions o;
  o.tol = tol;
  const BlochVector a0 = simulate_random_system(spec, o);
  GroupComparison c;
  for (int i = 0; i < n; ++i) {
    o.ions = {i};
    c.effects.push_back(decompose_effect(simulate_random_system(spec, o), target));
    o.ions.clear();
  }
  for (int i = 0; i < n; ++i) o.ions.push_back(i);
  c.full = simulate_random_system(spec, o);
  c.qbies = qbies_compose(c.effects, a0);
  c.full_error = error_from_bloch(c.full, target);
  c.qbies_error = error_from_bloch(c.qbies, target);
  return c;
}

}  // namespace isd

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

#pragma once

#include <cstdint>
#include <limits>

namespace isd {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Named sub-streams of one trial.
enum class Stream : std::uint64_t {
  Doping = 1,
  Site2 = 2,
  Frequency = 3,
  InitialState = 4,
  Validation = 5,
  Orientation = 6,
  Bootstrap = 7,
};

/// Counter-based generator: the n-th draw of stream (seed, trial, stream) is a
/// pure function of those four numbers, so results never depend on which worker
/// ran a trial or in which order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream)
      : key_(splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ (stream * 0xd1342543de82ef95ULL))) {}
  CounterRng(std::uint64_t seed, std::uint64_t trial, Stream stream)
      : CounterRng(seed, trial, static_cast<std::uint64_t>(stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52; }

  /// Lorentzian with the given centre and full width at half maximum.
  double cauchy(double center, double fwhm);
  /// exp(uniform(log lo, log hi)).
  double log_uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  /// Failures before the first success of a Bernoulli(p) sequence.
  std::uint64_t geometric(double p);
  /// Draws an index from unnormalized non-negative weights.
  int categorical(const double* weights, int n);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace isd

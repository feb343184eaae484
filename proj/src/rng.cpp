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

#include "isd/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isd {

double CounterRng::cauchy(double center, double fwhm) {
  return center + 0.5 * fwhm * std::tan(std::numbers::pi * (uniform_open() - 0.5));
}

double CounterRng::log_uniform(double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_uniform: need 0 < lo <= hi");
  return std::exp(std::log(lo) + uniform() * (std::log(hi) - std::log(lo)));
}

std::uint64_t CounterRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("below: empty range");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % n;
}

std::uint64_t CounterRng::geometric(double p) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("geometric: p must lie in (0, 1]");
  if (p == 1.0) return 0;
  const double g = std::floor(std::log(uniform_open()) / std::log1p(-p));
  return g >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(g);
}

int CounterRng::categorical(const double* weights, int n) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += weights[i];
  if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to zero");
  double x = uniform() * total;
  for (int i = 0; i < n; ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  // Rounding: fall back to the last positive weight.
  for (int i = n - 1; i >= 0; --i)
    if (weights[i] > 0.0) return i;
  return n - 1;
}

}  // namespace isd

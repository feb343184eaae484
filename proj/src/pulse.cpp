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

#include "isd/pulse.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "isd/level_scheme.hpp"

namespace isd {

namespace {

std::uint64_t hash_doubles(std::initializer_list<double> values) {
  std::string bytes;
  for (double v : values) {
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof(double));
    bytes.append(buf, sizeof(double));
  }
  return fnv1a(bytes);
}

}  // namespace

PulseEnvelope PulseEnvelope::cut_gaussian(double duration, double sigma, double area) {
  if (!(duration > 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("pulse envelope: duration and sigma must be positive");
  }
  PulseEnvelope p;
  p.duration = duration;
  p.sigma = sigma;
  p.area = area;
  const double edge = std::exp(-duration * duration / (8.0 * sigma * sigma));
  const double gauss_integral = sigma * std::sqrt(2.0 * std::numbers::pi) *
                                std::erf(duration / (2.0 * std::numbers::sqrt2 * sigma));
  p.c1 = area / (gauss_integral - duration * edge);
  p.c2 = p.c1 * edge;
  return p;
}

PulseEnvelope PulseEnvelope::standard() {
  return cut_gaussian(1.68e-6, 4.16e-6, std::numbers::pi / std::numbers::sqrt2);
}

double PulseEnvelope::operator()(double t) const {
  if (t < 0.0 || t > duration) return 0.0;
  const double x = t - 0.5 * duration;
  const double value = c1 * std::exp(-x * x / (2.0 * sigma * sigma)) - c2;
  return value > 0.0 ? value : 0.0;
}

std::uint64_t PulseEnvelope::hash() const { return hash_doubles({duration, sigma, area}); }

std::uint64_t TwoColorGate::hash() const {
  return hash_doubles({phi0, phi1, theta, envelope.duration, envelope.sigma, envelope.area});
}

PulseTrain::PulseTrain(PulseEnvelope envelope, std::vector<std::array<double, 2>> phases)
    : envelope_(envelope), phases_(std::move(phases)) {}

PulseTrain PulseTrain::gates(const TwoColorGate& gate, int count) {
  std::vector<std::array<double, 2>> phases;
  const double jump = std::numbers::pi - gate.theta;
  for (int k = 0; k < count; ++k) {
    phases.push_back({gate.phi0, gate.phi1});
    phases.push_back({gate.phi0 + jump, gate.phi1 + jump});
  }
  return PulseTrain(gate.envelope, std::move(phases));
}

std::array<std::complex<double>, 2> PulseTrain::drive(double t) const {
  if (phases_.empty() || t < 0.0) return {0.0, 0.0};
  auto index = static_cast<std::size_t>(t / envelope_.duration);
  if (index >= phases_.size()) {
    // The final instant belongs to the last pulse.
    if (t > duration()) return {0.0, 0.0};
    index = phases_.size() - 1;
  }
  const double amplitude = envelope_(t - envelope_.duration * static_cast<double>(index));
  const auto& ph = phases_[index];
  return {std::polar(amplitude, ph[0]), std::polar(amplitude, ph[1])};
}

}  // namespace isd

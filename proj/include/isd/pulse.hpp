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

#include <array>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace isd {

/// Cut Gaussian Rabi envelope, zero at both ends of [0, duration].
struct PulseEnvelope {
  double duration = 0.0;  // s
  double sigma = 0.0;     // s
  double area = 0.0;      // rad
  double c1 = 0.0;        // rad/s
  double c2 = 0.0;        // rad/s

  /// Resolves C1 and C2 so the envelope vanishes at the edges and integrates to `area`.
  static PulseEnvelope cut_gaussian(double duration, double sigma, double area);
  /// t_g = 1.68 us, sigma = 4.16 us, area pi/sqrt(2).
  static PulseEnvelope standard();

  double operator()(double t) const;
  std::uint64_t hash() const;
};

inline double gaussian_envelope(double t, const PulseEnvelope& p) { return p(t); }

/// Two simultaneous drive colors on |0>-|e> and |1>-|e>; a gate is two such pulses,
/// the second with both phases advanced by pi - theta.
struct TwoColorGate {
  double phi0 = 0.0;
  double phi1 = std::numbers::pi;
  double theta = std::numbers::pi;
  PulseEnvelope envelope = PulseEnvelope::standard();

  static TwoColorGate not_gate() { return TwoColorGate{}; }
  double duration() const { return 2.0 * envelope.duration; }
  std::uint64_t hash() const;
};

/// Back-to-back pulses starting at t = 0, each lasting envelope.duration.
class PulseTrain {
 public:
  PulseTrain() = default;
  PulseTrain(PulseEnvelope envelope, std::vector<std::array<double, 2>> phases);

  /// `count` consecutive gates.
  static PulseTrain gates(const TwoColorGate& gate, int count = 1);

  /// Complex drive of each color: Omega(t) * exp(i phi_c). Zero outside the train.
  std::array<std::complex<double>, 2> drive(double t) const;

  double duration() const { return envelope_.duration * static_cast<double>(phases_.size()); }
  std::size_t pulse_count() const { return phases_.size(); }
  double pulse_duration() const { return envelope_.duration; }
  const PulseEnvelope& envelope() const { return envelope_; }

 private:
  PulseEnvelope envelope_;
  std::vector<std::array<double, 2>> phases_;
};

}  // namespace isd

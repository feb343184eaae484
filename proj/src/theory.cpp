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

#include "isd/theory.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace isd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double theory_error_one_ion(double delta_nu_hz, double t_e) {
  return 0.25 - 0.25 * std::cos(kTwoPi * t_e * delta_nu_hz);
}

std::pair<std::complex<double>, std::complex<double>> bright_dark(const Eigen::Vector2cd& c,
                                                                  double phi) {
  const std::complex<double> e = std::polar(1.0, phi);
  const double r = 1.0 / std::numbers::sqrt2;
  return {r * (c[0] + e * c[1]), r * (c[0] - e * c[1])};
}

TheoryConfig TheoryConfig::product(double t_e, double phi, double theta,
                                   const std::vector<Eigen::Vector2cd>& ions,
                                   const Eigen::MatrixXd& shifts_hz) {
  if (ions.empty()) throw std::invalid_argument("TheoryConfig::product: qubit state missing");
  const int n = static_cast<int>(ions.size()) - 1;
  if (n > kMaxIons) throw TheoryCapError("TheoryConfig: too many spectator ions");
  TheoryConfig cfg;
  cfg.t_e = t_e;
  cfg.phi = phi;
  cfg.theta = theta;
  cfg.n = n;
  cfg.shifts_hz = shifts_hz;
  const auto [qb, qd] = bright_dark(ions[0], phi);
  std::vector<std::pair<std::complex<double>, std::complex<double>>> bd;
  for (int j = 1; j <= n; ++j) bd.push_back(bright_dark(ions[j], phi));
  const std::size_t configs = std::size_t{1} << n;
  cfg.a_bright.resize(configs);
  cfg.a_dark.resize(configs);
  for (std::size_t s = 0; s < configs; ++s) {
    std::complex<double> amp = 1.0;
    for (int j = 0; j < n; ++j) amp *= (s >> j & 1u) ? bd[j].first : bd[j].second;
    cfg.a_bright[s] = qb * amp;
    cfg.a_dark[s] = qd * amp;
  }
  return cfg;
}

TheoryConfig TheoryConfig::not_gate_plus_i(double t_e, const Eigen::MatrixXd& shifts_hz) {
  const Eigen::Vector2cd plus_i(1.0 / std::numbers::sqrt2,
                                std::complex<double>(0.0, 1.0 / std::numbers::sqrt2));
  const auto ions = std::vector<Eigen::Vector2cd>(shifts_hz.rows(), plus_i);
  return product(t_e, std::numbers::pi, std::numbers::pi, ions, shifts_hz);
}

void TheoryConfig::validate() const {
  if (n < 0) throw std::invalid_argument("TheoryConfig: negative ion count");
  if (n > kMaxIons) throw TheoryCapError("TheoryConfig: " + std::to_string(n) + " ions exceed cap");
  const std::size_t configs = std::size_t{1} << n;
  if (a_bright.size() != configs || a_dark.size() != configs) {
    throw std::invalid_argument("TheoryConfig: amplitude tables must have 2^n entries");
  }
  if (shifts_hz.rows() != n + 1 || shifts_hz.cols() != n + 1) {
    throw std::invalid_argument("TheoryConfig: shift table must be (n+1)x(n+1)");
  }
  if ((shifts_hz - shifts_hz.transpose()).cwiseAbs().maxCoeff() > 0.0) {
    throw std::invalid_argument("TheoryConfig: shift table is not symmetric");
  }
  double norm = 0.0;
  for (std::size_t s = 0; s < configs; ++s) norm += std::norm(a_bright[s]) + std::norm(a_dark[s]);
  if (std::abs(norm - 1.0) > 1e-12) throw std::invalid_argument("TheoryConfig: state not normalized");
}

BlochVector theory_bloch(const TheoryConfig& config) {
  config.validate();
  const std::size_t configs = std::size_t{1} << config.n;
  const double c = std::cos(config.phi);
  const double s = std::sin(config.phi);
  double u = 0.0, v = 0.0, w = 0.0;
  for (std::size_t st = 0; st < configs; ++st) {
    double bright_shift = 0.0;
    for (int j = 0; j < config.n; ++j) {
      if (st >> j & 1u) bright_shift += config.shifts_hz(0, j + 1);
    }
    const double beta = config.theta - kTwoPi * config.t_e * bright_shift;
    const std::complex<double> xi =
        config.a_bright[st] * std::conj(config.a_dark[st]) * std::polar(1.0, beta);
    const double p = std::norm(config.a_bright[st]) - std::norm(config.a_dark[st]);
    u += c * p + 2.0 * s * xi.imag();
    v += -s * p + 2.0 * c * xi.imag();
    w += 2.0 * xi.real();
  }
  return {u, v, w};
}

TeFit fit_te(const std::vector<std::pair<double, double>>& data, double guess) {
  if (data.empty()) throw FitError("fit_te: no data");
  if (!(guess > 0.0)) throw FitError("fit_te: guess must be positive");
  double scale = 0.0;
  for (const auto& [dnu, err] : data) scale = std::max(scale, std::abs(err));
  if (scale < 1e-14) throw FitError("fit_te: data carry no signal, t_e is undetermined");

  const auto sse = [&](double t_e) {
    double acc = 0.0;
    for (const auto& [dnu, err] : data) {
      const double r = theory_error_one_ion(dnu, t_e) - err;
      acc += r * r;
    }
    return acc;
  };

  // Coarse logarithmic scan, then golden-section refinement in log t_e.
  constexpr int kScan = 400;
  const double lo = std::log(guess) - std::log(10.0);
  const double hi = std::log(guess) + std::log(10.0);
  int best = 0;
  double best_val = sse(std::exp(lo));
  for (int i = 1; i <= kScan; ++i) {
    const double val = sse(std::exp(lo + (hi - lo) * i / kScan));
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  if (best == 0 || best == kScan) throw FitError("fit_te: optimum at the edge of the search window");
  double a = lo + (hi - lo) * (best - 1) / kScan;
  double b = lo + (hi - lo) * (best + 1) / kScan;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = sse(std::exp(x1)), f2 = sse(std::exp(x2));
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = sse(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = sse(std::exp(x2));
    }
  }
  TeFit fit;
  fit.t_e = std::exp(0.5 * (a + b));
  fit.rms_residual = std::sqrt(sse(fit.t_e) / static_cast<double>(data.size()));
  return fit;
}

}  // namespace isd

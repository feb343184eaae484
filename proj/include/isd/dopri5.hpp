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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace isd {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerance {
  double rtol = 1e-10;
  double atol = 1e-10;
  /// Hard limit on accepted + rejected steps per integration call.
  std::int64_t max_steps = 50'000'000;

  static Tolerance tight() { return {3e-14, 3e-14}; }
};

struct StepStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t rhs_evals = 0;

  StepStats& operator+=(const StepStats& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    rhs_evals += o.rhs_evals;
    return *this;
  }
};

/// Dormand-Prince 5(4) with the PI step-size controller from Hairer, Norsett and
/// Wanner's DOPRI5. `State` is any Eigen dense type; `rhs(t, y, dy)` writes dy/dt.
template <class State>
class Dopri5 {
 public:
  template <class Rhs>
  StepStats integrate(Rhs&& rhs, double t0, double t1, State& y, const Tolerance& tol,
                      double h_hint = 0.0) {
    StepStats stats;
    if (!(tol.rtol > 0.0) || !(tol.atol > 0.0)) {
      throw std::invalid_argument("dopri5: tolerances must be positive");
    }
    if (t1 <= t0) return stats;

    k1_.resizeLike(y);
    rhs(t0, y, k1_);
    ++stats.rhs_evals;

    double h = h_hint > 0.0 ? h_hint : initial_step(rhs, t0, y, t1 - t0, tol, stats);
    double t = t0;
    double facold = 1e-4;
    bool last_rejected = false;

    while (t < t1) {
      if (stats.accepted + stats.rejected >= tol.max_steps) {
        throw NumericalError("dopri5: step limit exceeded at t=" + std::to_string(t));
      }
      bool last = false;
      if (t + 1.01 * h >= t1) {
        h = t1 - t;
        last = true;
      }
      if (h <= std::abs(t) * 16.0 * std::numeric_limits<double>::epsilon() || h <= 0.0) {
        throw NumericalError("dopri5: step size underflow at t=" + std::to_string(t));
      }
      const double err = attempt(rhs, t, h, y, tol);
      stats.rhs_evals += 6;

      const double fac11 = std::pow(err, kExpo1);
      if (err <= 1.0) {
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::clamp(fac / kSafe, kFacMin, kFacMax);
        facold = std::max(err, 1e-4);
        ++stats.accepted;
        t = last ? t1 : t + h;
        y.swap(ynew_);
        k1_.swap(k7_);  // first-same-as-last
        double hnew = h / fac;
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;
        last_step_ = h;
        h = hnew;
      } else {
        ++stats.rejected;
        h /= std::min(kFacMax, fac11 / kSafe);
        last_rejected = true;
      }
    }
    return stats;
  }

  /// Size of the last accepted step; useful as a hint for the next segment.
  double last_step() const { return last_step_; }

 private:
  static constexpr double kSafe = 0.9;
  static constexpr double kBeta = 0.04;
  static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  static constexpr double kFacMin = 0.1;  // largest growth is 1/kFacMin
  static constexpr double kFacMax = 5.0;  // largest shrink

  double norm(const State& e, const State& y0, const State& y1, const Tolerance& tol) const {
    const Eigen::Index n = e.size();
    // Max norm: every component individually honors atol + rtol |y|.
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mag = std::sqrt(std::max(std::norm(y0.data()[i]), std::norm(y1.data()[i])));
      const double sk = tol.atol + tol.rtol * mag;
      worst = std::max(worst, std::norm(e.data()[i]) / (sk * sk));
    }
    return std::sqrt(worst);
  }

  template <class Rhs>
  double initial_step(Rhs& rhs, double t0, const State& y0, double span, const Tolerance& tol,
                      StepStats& stats) {
    // Hairer's starting-step heuristic.
    double dnf = 0.0, dny = 0.0;
    const Eigen::Index n = y0.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sk = tol.atol + tol.rtol * std::abs(y0.data()[i]);
      dnf += std::norm(k1_.data()[i]) / (sk * sk);
      dny += std::norm(y0.data()[i]) / (sk * sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 * span : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, span);
    State y1 = y0 + h * k1_;
    State f1;
    f1.resizeLike(y0);
    rhs(t0 + h, y1, f1);
    ++stats.rhs_evals;
    double der2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sk = tol.atol + tol.rtol * std::abs(y0.data()[i]);
      der2 += std::norm(f1.data()[i] - k1_.data()[i]) / (sk * sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, span});
  }

  template <class Rhs>
  double attempt(Rhs& rhs, double t, double h, const State& y, const Tolerance& tol) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    tmp_ = y + (h * a21) * k1_;
    k2_.resizeLike(y);
    rhs(t + c2 * h, tmp_, k2_);
    tmp_ = y + h * (a31 * k1_ + a32 * k2_);
    k3_.resizeLike(y);
    rhs(t + c3 * h, tmp_, k3_);
    tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    k4_.resizeLike(y);
    rhs(t + c4 * h, tmp_, k4_);
    tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    k5_.resizeLike(y);
    rhs(t + c5 * h, tmp_, k5_);
    tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    k6_.resizeLike(y);
    rhs(t + h, tmp_, k6_);
    ynew_ = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    k7_.resizeLike(y);
    rhs(t + h, ynew_, k7_);
    tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    return norm(tmp_, y, ynew_, tol);
  }

  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, ynew_, tmp_;
  double last_step_ = 0.0;
};

}  // namespace isd

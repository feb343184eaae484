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

#include "isd/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace isd {

namespace {

void check_dims(Eigen::Index rows, const std::vector<int>& dims, int zero, int one) {
  if (dims.empty()) throw std::invalid_argument("reduce_to_qubit: empty dimension list");
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  if (rows != total) throw std::invalid_argument("reduce_to_qubit: dimension mismatch");
  if (zero < 0 || one < 0 || zero >= dims.front() || one >= dims.front() || zero == one) {
    throw std::invalid_argument("reduce_to_qubit: invalid qubit levels");
  }
}

}  // namespace

QubitState reduce_to_qubit(const DensityMatrix& rho_full, const std::vector<int>& dims, int zero,
                           int one) {
  check_dims(rho_full.rows(), dims, zero, one);
  const Eigen::Index env = rho_full.rows() / dims.front();
  const int lq = dims.front();
  Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(lq, lq);
  for (int a = 0; a < lq; ++a) {
    for (int b = 0; b < lq; ++b) {
      std::complex<double> s = 0.0;
      for (Eigen::Index k = 0; k < env; ++k) s += rho_full(a * env + k, b * env + k);
      reduced(a, b) = s;
    }
  }
  QubitState q;
  q.rho << reduced(zero, zero), reduced(zero, one), reduced(one, zero), reduced(one, one);
  q.leakage = reduced.trace().real() - q.rho.trace().real();
  return q;
}

QubitState reduce_pure(const StateVector& psi, const std::vector<int>& dims, int zero, int one) {
  check_dims(psi.size(), dims, zero, one);
  const Eigen::Index env = psi.size() / dims.front();
  const auto block = [&](int a) { return psi.segment(a * env, env); };
  QubitState q;
  q.rho(0, 0) = block(zero).squaredNorm();
  q.rho(1, 1) = block(one).squaredNorm();
  q.rho(0, 1) = block(one).dot(block(zero));  // sum psi_0k conj(psi_1k)
  q.rho(1, 0) = std::conj(q.rho(0, 1));
  q.leakage = psi.squaredNorm() - q.rho.trace().real();
  return q;
}

BlochVector bloch_vector(const Eigen::Matrix2cd& rho) {
  const std::complex<double> i(0.0, 1.0);
  return {(rho(0, 1) + rho(1, 0)).real(), (i * (rho(0, 1) - rho(1, 0))).real(),
          (rho(0, 0) - rho(1, 1)).real()};
}

double gate_error(const Eigen::Matrix2cd& rho, const Eigen::Vector2cd& target) {
  const Eigen::Vector2cd t = target.normalized();
  return 1.0 - t.dot(rho * t).real();
}

double error_from_bloch(const BlochVector& a, const BlochVector& target) {
  return 0.5 * (1.0 - a.dot(target.normalized()));
}

ErrorSourceEffect decompose_effect(const BlochVector& observed, const BlochVector& reference) {
  ErrorSourceEffect eff;
  const double len = observed.norm();
  eff.shrinkage = len;
  if (len < 1e-300) {
    // Direction is unobservable; keep the rotation trivial.
    eff.shrinkage = 0.0;
    return eff;
  }
  const BlochVector r = reference.normalized();
  const BlochVector d = observed / len;
  BlochVector axis = r.cross(d);
  const double s = axis.norm();
  const double c = std::clamp(r.dot(d), -1.0, 1.0);
  if (s < 1e-15) {
    if (c > 0.0) return eff;
    // Antipodal: rotate by pi about the coordinate axis least aligned with the
    // reference, made perpendicular to it.
    int k = 0;
    r.cwiseAbs().minCoeff(&k);
    BlochVector e = BlochVector::Unit(k);
    axis = (e - e.dot(r) * r).normalized();
    eff.rotation = Eigen::AngleAxisd(M_PI, axis).toRotationMatrix();
    eff.angle = M_PI;
    return eff;
  }
  axis /= s;
  eff.angle = std::atan2(s, c);
  Eigen::Matrix3d k;
  k << 0.0, -axis.z(), axis.y(), axis.z(), 0.0, -axis.x(), -axis.y(), axis.x(), 0.0;
  eff.rotation = Eigen::Matrix3d::Identity() + s * k + (1.0 - c) * k * k;
  return eff;
}

BlochVector qbies_compose_subset(const std::vector<ErrorSourceEffect>& effects,
                                 const std::vector<std::size_t>& subset, const BlochVector& a0) {
  std::vector<std::size_t> order = subset;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (effects[x].angle != effects[y].angle) return effects[x].angle > effects[y].angle;
    return x < y;
  });
  BlochVector a = a0;
  for (std::size_t idx : order) a = effects[idx].apply(a);
  return a;
}

BlochVector qbies_compose(const std::vector<ErrorSourceEffect>& effects, const BlochVector& a0) {
  std::vector<std::size_t> all(effects.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return qbies_compose_subset(effects, all, a0);
}

}  // namespace isd

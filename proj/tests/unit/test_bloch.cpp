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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "isd/bloch.hpp"

using namespace isd;
using cd = std::complex<double>;

namespace {

Eigen::Matrix2cd pure(cd a, cd b) {
  Eigen::Vector2cd v(a, b);
  v.normalize();
  return v * v.adjoint();
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
}

void check_rotation(const Eigen::Matrix3d& r) {
  CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-10));
}

}  // namespace

TEST_CASE("bloch vectors of standard states") {
  const auto z = bloch_vector(pure(1.0, 0.0));
  CHECK((z - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
  const auto y = bloch_vector(pure(1.0, cd(0.0, 1.0)));
  CHECK((y - initial_bloch()).norm() < 1e-15);
  const auto x = bloch_vector(pure(1.0, 1.0));
  CHECK((x - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  CHECK(bloch_vector(0.5 * Eigen::Matrix2cd::Identity()).norm() < 1e-15);
  CHECK((bloch_vector(pure(1.0, cd(0.0, -1.0))) - not_target_bloch()).norm() < 1e-15);
}

TEST_CASE("gate error limits") {
  const Eigen::Vector2cd t(1.0 / std::numbers::sqrt2, cd(0.0, -1.0 / std::numbers::sqrt2));
  CHECK(gate_error(t * t.adjoint(), t) == doctest::Approx(0.0).scale(1.0));
  CHECK(gate_error(0.5 * Eigen::Matrix2cd::Identity(), t) == doctest::Approx(0.5));
  CHECK(gate_error(pure(1.0, cd(0.0, 1.0)), t) == doctest::Approx(1.0));
  // Agrees with the Bloch form for pure targets.
  const auto rho = pure(0.3, cd(0.2, -0.9));
  CHECK(gate_error(rho, t) == doctest::Approx(error_from_bloch(bloch_vector(rho), not_target_bloch())));
  CHECK(error_from_bloch(Eigen::Vector3d(0, 0.4, 0), not_target_bloch()) == doctest::Approx(0.7));
}

TEST_CASE("partial trace of a product state returns the qubit factor") {
  const Eigen::Matrix2cd q = pure(0.6, cd(0.0, 0.8));
  Eigen::Matrix3cd q3 = Eigen::Matrix3cd::Zero();
  q3.block<2, 2>(0, 0) = q;
  Eigen::MatrixXcd env = Eigen::MatrixXcd::Zero(6, 6);
  env(0, 0) = 0.2;
  env(3, 3) = 0.5;
  env(5, 5) = 0.3;
  env(0, 3) = env(3, 0) = 0.1;
  const auto full = tensor_density({q3, env});
  const auto red = reduce_to_qubit(full, {3, 6}, 0, 1);
  CHECK((red.rho - q).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(red.leakage == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("maximally entangled qubit reduces to the centre of the sphere") {
  // (|0,g> + |1,e>)/sqrt2 with a two-level environment.
  StateVector psi = StateVector::Zero(6);
  psi[0 * 2 + 0] = 1.0 / std::numbers::sqrt2;
  psi[1 * 2 + 1] = 1.0 / std::numbers::sqrt2;
  const auto q = reduce_pure(psi, {3, 2}, 0, 1);
  CHECK(bloch_vector(q.rho).norm() < 1e-15);
  const auto qd = reduce_to_qubit(psi * psi.adjoint(), {3, 2}, 0, 1);
  CHECK((qd.rho - q.rho).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("leakage plus block trace is one") {
  StateVector psi(6);
  psi << 0.3, cd(0.1, 0.2), 0.4, cd(0.0, -0.5), 0.6, 0.2;
  psi.normalize();
  const auto q = reduce_pure(psi, {3, 2}, 0, 1);
  CHECK(q.leakage + q.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(q.leakage == doctest::Approx(std::norm(psi[4]) + std::norm(psi[5])));
  CHECK_THROWS_AS(reduce_pure(psi, {3, 3}, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(reduce_pure(psi, {3, 2}, 0, 3), std::invalid_argument);
}

TEST_CASE("decompose effect: identity, antipode, generic") {
  const BlochVector ref = not_target_bloch();
  auto id = decompose_effect(ref, ref);
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-15);
  CHECK(id.shrinkage == doctest::Approx(1.0));
  CHECK(id.angle == 0.0);

  auto anti = decompose_effect(-ref, ref);
  check_rotation(anti.rotation);
  CHECK(anti.angle == doctest::Approx(std::numbers::pi));
  CHECK((anti.apply(ref) + ref).norm() < 1e-12);
  // Least-aligned axis of (0,-1,0) is x (first minimum), so the pi rotation is about x.
  CHECK((anti.rotation * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitX()).norm() < 1e-12);

  const BlochVector obs(0.0, -0.9, 0.1);
  auto e = decompose_effect(obs, ref);
  check_rotation(e.rotation);
  CHECK(e.shrinkage == doctest::Approx(std::hypot(0.9, 0.1)));
  CHECK(e.angle == doctest::Approx(std::atan2(0.1, 0.9)));
  const BlochVector dir = e.rotation * ref;
  CHECK((dir - obs.normalized()).norm() < 1e-12);

  auto zero = decompose_effect(BlochVector::Zero(), ref);
  CHECK(zero.shrinkage == 0.0);
  CHECK((zero.rotation - Eigen::Matrix3d::Identity()).norm() == 0.0);
}

TEST_CASE("decomposition reproduces random observations") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> len(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const BlochVector ref = random_unit(rng);
    const BlochVector obs = len(rng) * random_unit(rng);
    const auto e = decompose_effect(obs, ref);
    check_rotation(e.rotation);
    CHECK((e.apply(ref) - obs).norm() < 1e-10);
    CHECK(e.shrinkage <= 1.0 + 1e-9);
  }
}

TEST_CASE("qbies composition") {
  const BlochVector a0 = not_target_bloch();
  CHECK((qbies_compose({}, a0) - a0).norm() == 0.0);

  ErrorSourceEffect half;
  half.shrinkage = 0.5;
  CHECK((qbies_compose({half}, a0) - 0.5 * a0).norm() < 1e-15);

  // Equal and opposite rotations about the same axis: direction restored, length s^2.
  const double s = 0.9, ang = 0.3;
  const BlochVector p = Eigen::AngleAxisd(ang, Eigen::Vector3d::UnitX()) * a0 * s;
  const BlochVector m = Eigen::AngleAxisd(-ang, Eigen::Vector3d::UnitX()) * a0 * s;
  const auto ep = decompose_effect(p, a0), em = decompose_effect(m, a0);
  const BlochVector out = qbies_compose({ep, em}, a0);
  const BlochVector oracle = (s * em.rotation) * ((s * ep.rotation) * a0);
  CHECK((out - oracle).norm() < 1e-12);
  CHECK((out - s * s * a0).norm() < 1e-12);
}

TEST_CASE("composition length is the product of shrinkages and common-axis order is irrelevant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const BlochVector a0 = not_target_bloch();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ErrorSourceEffect> effects;
    double prod = 1.0;
    for (int k = 0; k < 6; ++k) {
      ErrorSourceEffect e;
      e.angle = u(rng);
      e.rotation = Eigen::AngleAxisd(e.angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
      e.shrinkage = 0.5 + 0.5 * u(rng);
      prod *= e.shrinkage;
      effects.push_back(e);
    }
    const BlochVector a = qbies_compose(effects, a0);
    CHECK(a.norm() == doctest::Approx(prod).epsilon(1e-14));
    BlochVector reversed = a0;
    for (auto it = effects.rbegin(); it != effects.rend(); ++it) reversed = it->apply(reversed);
    CHECK((a - reversed).norm() < 1e-12);
  }
}

TEST_CASE("largest rotation is applied first, ties by index") {
  const BlochVector a0 = not_target_bloch();
  ErrorSourceEffect small = decompose_effect(BlochVector(0.1, -1.0, 0.0), a0);
  ErrorSourceEffect large = decompose_effect(BlochVector(0.0, -1.0, 0.5), a0);
  const BlochVector expected = small.apply(large.apply(a0));
  CHECK((qbies_compose({small, large}, a0) - expected).norm() < 1e-15);
  CHECK((qbies_compose_subset({small, large}, {0}, a0) - small.apply(a0)).norm() < 1e-15);
}

// Copyright 2026 The Qutrit Forces Authors
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

#include <doctest.h>

#include <cmath>

#include "qutrit/trap_modes.hpp"

using namespace qutrit;

namespace {

TrapSpec chain(int n, double omega = 1.0) {
  TrapSpec t;
  t.n_ions = n;
  t.omega = omega;
  return t;
}

}  // namespace

TEST_CASE("single ion sits at the trap centre") {
  const ModeData m = normal_modes(chain(1, 2.5));
  CHECK(m.equilibrium[0] == doctest::Approx(0.0));
  CHECK(m.frequencies[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(m.mode_matrix(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("two-ion equilibrium solves 2u = 1/(2u)^2") {
  const Eigen::VectorXd u = equilibrium_positions(chain(2));
  const double exact = std::cbrt(0.25);
  CHECK(std::abs(u[0] + exact) < 1e-12);
  CHECK(std::abs(u[1] - exact) < 1e-12);
  CHECK(std::abs(u[1] - 0.629960524947) < 1e-11);
}

TEST_CASE("three-ion equilibrium has outer ions at (5/4)^(1/3)") {
  const Eigen::VectorXd u = equilibrium_positions(chain(3));
  const double a = std::cbrt(1.25);
  CHECK(std::abs(u[0] + a) < 1e-12);
  CHECK(std::abs(u[1]) < 1e-12);
  CHECK(std::abs(u[2] - a) < 1e-12);
  CHECK(std::abs(a - 1.077217345) < 1e-9);
}

TEST_CASE("two-ion modes are centre of mass and stretch") {
  const ModeData m = normal_modes(chain(2));
  CHECK(std::abs(m.frequencies[0] - 1.0) < 1e-9);
  CHECK(std::abs(m.frequencies[1] - std::sqrt(3.0)) < 1e-9);
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2d expected;
  expected << s, s, s, -s;
  CHECK((m.mode_matrix - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("three-ion spectrum is 1, sqrt 3, sqrt(29/5)") {
  const ModeData m = normal_modes(chain(3));
  CHECK(std::abs(m.frequencies[0] - 1.0) < 1e-9);
  CHECK(std::abs(m.frequencies[1] - std::sqrt(3.0)) < 1e-9);
  CHECK(std::abs(m.frequencies[2] - std::sqrt(29.0 / 5.0)) < 1e-9);
}

TEST_CASE("frequencies scale with omega") {
  const ModeData m = normal_modes(chain(3, 2.0));
  CHECK(std::abs(m.frequencies[1] - 2.0 * std::sqrt(3.0)) < 1e-9);
}

TEST_CASE("chain invariants for N = 1..10") {
  for (int n = 1; n <= 10; ++n) {
    CAPTURE(n);
    const ModeData m = normal_modes(chain(n));
    const Eigen::MatrixXd& d = m.mode_matrix;
    CHECK((d.transpose() * d - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(m.frequencies[0] - 1.0) < 1e-9);
    CHECK((d.col(0).array() - 1.0 / std::sqrt(double(n))).abs().maxCoeff() < 1e-9);
    CHECK(force_balance_residual(m.equilibrium).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 1; i < n; ++i) {
      CHECK(m.equilibrium[i] > m.equilibrium[i - 1]);
      CHECK(m.frequencies[i] > m.frequencies[i - 1]);
    }
    // Mirror symmetry of positions and |D|.
    CHECK((m.equilibrium + m.equilibrium.reverse()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((d.cwiseAbs() - d.cwiseAbs().colwise().reverse()).cwiseAbs().maxCoeff() < 1e-9);
    // First entry above 1e-10 in each column is positive.
    for (int k = 0; k < n; ++k) {
      int i = 0;
      while (std::abs(d(i, k)) <= 1e-10) ++i;
      CHECK(d(i, k) > 0.0);
    }
  }
}

TEST_CASE("hessian eigen-solve agrees with the returned spectrum") {
  const ModeData m = normal_modes(chain(5));
  const Eigen::MatrixXd a = chain_hessian(m.equilibrium);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  CHECK((eig.eigenvalues().cwiseSqrt() - m.frequencies).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a * m.mode_matrix - m.mode_matrix * m.frequencies.cwiseAbs2().asDiagonal()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("invalid traps are rejected") {
  CHECK_THROWS_AS(normal_modes(chain(0)), InputError);
  CHECK_THROWS_AS(normal_modes(chain(2, 0.0)), InputError);
  CHECK_THROWS_AS(normal_modes(chain(2, -1.0)), InputError);
  TrapSpec t = chain(2);
  t.mass = 0.0;
  CHECK_THROWS_AS(normal_modes(t), InputError);
}

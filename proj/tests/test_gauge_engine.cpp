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
#include <random>

#include "fixtures.hpp"
#include "qutrit/gauge_engine.hpp"

using namespace qutrit;
using fixtures::constant;

TEST_CASE("zero pulse has zero phases") {
  const ModeData modes = normal_modes(fixtures::two_ions());
  const PulseSchedule s(fixtures::two_ions(), 4.0);
  const CouplingTable t(s, modes);
  const GaugePhases p = two_qutrit_phases(t, 4.0);
  CHECK(p.phi_two.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.phi_single.cwiseAbs().maxCoeff() == 0.0);
  CHECK(adiabatic_phases(t, 4.0).phi_two.cwiseAbs().maxCoeff() == 0.0);
  CHECK(single_qutrit_phase(t, 4.0) == 0.0);
  CHECK(adiabaticity_check(s, modes).ratio == 0.0);
}

TEST_CASE("constant couplings reproduce the closed-form double integral") {
  for (double w : {0.7, 1.0, 2.3}) {
    for (double T : {1.0, 5.5, 40.0}) {
      CAPTURE(w);
      CAPTURE(T);
      const double f1 = 0.8, f2 = -0.45;
      const double g1 = f1 / std::sqrt(2.0 * w), g2 = f2 / std::sqrt(2.0 * w);
      PulseSchedule s(fixtures::two_ions(), T);
      s.set({0, 1}, constant(T, f1));
      s.set({1, 2}, constant(T, f2));
      const GaugePhases p = two_qutrit_phases(coupling_table(s, fixtures::single_mode(w)), T);
      const double kernel = (std::sin(w * T) - w * T) / (w * w);
      CHECK(std::abs(p.phi_two(1, 2) - 2.0 * g1 * g2 * kernel) < 1e-9);
      CHECK(std::abs(p.phi_single(0, 1) - g1 * g1 * kernel) < 1e-9);
      CHECK(std::abs(p.phi_single(1, 2) - g2 * g2 * kernel) < 1e-9);
      CHECK(p.phi_two(1, 1) == 0.0);
      CHECK(p.phi_single(0, 0) == 0.0);
    }
  }
}

TEST_CASE("single-slot phase after one period") {
  const double w = 1.4, f = 0.6, T = 2.0 * kPi / w;
  PulseSchedule s(fixtures::one_ion(), T);
  s.set({0, 2}, constant(T, f));
  const double g2 = f * f / (2.0 * w);
  CHECK(std::abs(single_qutrit_phase(coupling_table(s, fixtures::lone_mode(w)), T) + 2.0 * kPi * g2 / (w * w)) < 1e-9);
}

TEST_CASE("single-slot phase sums over modes and matches the pair phases") {
  const ModeData modes = normal_modes(fixtures::two_ions());
  const double T = 13.0;
  PulseSchedule s(fixtures::two_ions(), T);
  s.set({1, 1}, Waveform::fourier_sine(T, {0.5, -0.2, 0.3}));
  const CouplingTable t(s, modes);
  const double phi = single_qutrit_phase(t, T);
  CHECK(std::abs(phi - two_qutrit_phases(t, T).phi_single(1, 1)) < 1e-9);

  // Per-mode split: a mode matrix with only one mode coupled at a time.
  double sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    ModeData only = modes;
    only.mode_matrix.col(1 - k).setZero();
    sum += single_qutrit_phase(coupling_table(s, only), T);
  }
  CHECK(std::abs(phi - sum) < 1e-9);

  s.set({0, 0}, Waveform::fourier_sine(T, {0.1}));
  CHECK_THROWS_AS(single_qutrit_phase(coupling_table(s, modes), T), InputError);
}

TEST_CASE("adiabatic phases of constant couplings") {
  const double w = 1.2, T = 9.0, f1 = 0.5, f2 = 0.3;
  const double g1 = f1 / std::sqrt(2.0 * w), g2 = f2 / std::sqrt(2.0 * w);
  PulseSchedule s(fixtures::two_ions(), T);
  s.set({0, 0}, constant(T, f1));
  s.set({1, 2}, constant(T, f2));
  const GaugePhases p = adiabatic_phases(coupling_table(s, fixtures::single_mode(w)), T);
  CHECK(std::abs(p.phi_two(0, 2) + 2.0 * g1 * g2 * T / w) < 1e-10);
  CHECK(std::abs(p.phi_single(0, 0) + g1 * g1 * T / w) < 1e-10);
  CHECK(std::abs(p.phi_single(1, 2) + g2 * g2 * T / w) < 1e-10);
}

TEST_CASE("adiabaticity ratio of a sin^2 envelope") {
  const ModeData modes = normal_modes(fixtures::two_ions());
  const double A = 0.3;
  for (double T : {10.0, 20.0, 40.0}) {
    PulseSchedule s(fixtures::two_ions(), T);
    s.set({0, 1}, Waveform::enveloped_carrier(T, A, 0.0, 0.0));
    const AdiabaticityCheck c = adiabaticity_check(s, modes);
    CHECK(c.evaluable);
    CHECK(c.ratio == doctest::Approx(A * kPi / (T * std::sqrt(2.0))).epsilon(1e-10));
  }
  PulseSchedule s(fixtures::two_ions(), 10.0), s2(fixtures::two_ions(), 20.0);
  s.set({0, 1}, Waveform::enveloped_carrier(10.0, A, 0.0, 0.0));
  s2.set({0, 1}, Waveform::enveloped_carrier(20.0, A, 0.0, 0.0));
  CHECK(adiabaticity_check(s2, modes).ratio == doctest::Approx(adiabaticity_check(s, modes).ratio / 2).epsilon(1e-10));

  PulseSchedule pc(fixtures::two_ions(), 10.0);
  pc.set({0, 1}, constant(10.0, 1.0));
  const AdiabaticityCheck c = adiabaticity_check(pc, modes);
  CHECK_FALSE(c.evaluable);
  CHECK(std::isinf(c.ratio));
}

TEST_CASE("swapping ions transposes the pair phases") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const ModeData modes = normal_modes(fixtures::two_ions());
  const double T = 15.0;
  for (int trial = 0; trial < 3; ++trial) {
    PulseSchedule s(fixtures::two_ions(), T);
    for (int mu = 0; mu < 2; ++mu)
      for (int m = 0; m < 3; ++m) s.set({mu, m}, Waveform::fourier_sine(T, {u(rng), u(rng), u(rng)}));
    const GaugePhases p = two_qutrit_phases(coupling_table(s, modes), T);
    const GaugePhases q = two_qutrit_phases(coupling_table(s, modes), T, {1, 0});
    CHECK((p.phi_two - q.phi_two.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((p.phi_single.row(0) - q.phi_single.row(1)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("phases scale quadratically with the force") {
  const ModeData modes = normal_modes(fixtures::two_ions());
  const double T = 12.0;
  PulseSchedule s(fixtures::two_ions(), T);
  s.set({0, 1}, Waveform::fourier_sine(T, {0.3, 0.1}));
  s.set({1, 0}, Waveform::enveloped_carrier(T, 0.4, 0.8, 0.2));
  const GaugePhases p = two_qutrit_phases(coupling_table(s, modes), T);
  const GaugePhases p3 = two_qutrit_phases(coupling_table(s.scaled(3.0), modes), T);
  CHECK((p3.phi_two - 9.0 * p.phi_two).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((p3.phi_single - 9.0 * p.phi_single).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("kernel matrix matches a brute-force double integral") {
  const double T = 3.0, w = 2.0;
  const std::vector<Waveform> wf{Waveform::fourier_sine(T, {1.0, 0.5}), Waveform::enveloped_carrier(T, 1.0, 1.5, 0.0)};
  const Eigen::MatrixXd K = sine_kernel_matrix(wf, w, T, 1e-12);
  // Midpoint product rule on a fine triangle grid.
  const int n = 3000;
  const double h = T / n;
  Eigen::Matrix2d brute = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * h;
    for (int j = 0; j < i; ++j) {
      const double tp = (j + 0.5) * h;
      const double s = std::sin(w * (tp - t));
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) brute(a, b) += wf[a](t) * wf[b](tp) * s * h * h;
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) brute(a, b) += 0.0;  // diagonal cell has sin(0) at its centre
  }
  CHECK((K - brute).cwiseAbs().maxCoeff() < 1e-5);
}

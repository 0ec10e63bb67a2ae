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

#pragma once

#include <cmath>
#include <vector>

#include "qutrit/gauge_engine.hpp"
#include "qutrit/pulse_designer.hpp"
#include "qutrit/pulses.hpp"
#include "qutrit/trap_modes.hpp"

namespace fixtures {

using namespace qutrit;

inline TrapSpec two_ions() {
  TrapSpec t;
  t.n_ions = 2;
  return t;
}

inline TrapSpec one_ion() {
  TrapSpec t;
  t.n_ions = 1;
  return t;
}

/// Two ions coupled to one mode of frequency w with unit mode-matrix
/// entries; the second mode is decoupled so only one mode contributes.
inline ModeData single_mode(double w) {
  ModeData m;
  m.frequencies = Eigen::Vector2d(w, 2.0 * w + 1.0);
  m.mode_matrix = Eigen::Matrix2d::Zero();
  m.mode_matrix(0, 0) = 1.0;
  m.mode_matrix(1, 0) = 1.0;
  m.equilibrium = Eigen::Vector2d(-1.0, 1.0);
  m.mass = 1.0;
  return m;
}

/// One ion, one mode of frequency w; g = f / sqrt(2 w).
inline ModeData lone_mode(double w) {
  ModeData m;
  m.frequencies = Eigen::VectorXd::Constant(1, w);
  m.mode_matrix = Eigen::MatrixXd::Identity(1, 1);
  m.equilibrium = Eigen::VectorXd::Zero(1);
  m.mass = 1.0;
  return m;
}

inline Waveform constant(double T, double value) { return Waveform::piecewise_constant({0.0, T}, {value}); }

/// Twenty centre-of-mass periods.
inline double gate_time() { return 20.0 * 2.0 * kPi; }

/// Closed-loop pulse on level 1 of both ions with Phi_11 = 2 pi / 3.
inline DesignProblem phi11_problem() {
  DesignProblem p;
  p.trap = two_ions();
  p.modes = normal_modes(p.trap);
  p.duration = gate_time();
  p.driven = {{0, 1}, {1, 1}};
  p.n_terms = 8;
  p.two_qutrit = {{1, 1, 2.0 * kPi / 3.0}};
  return p;
}

inline const DesignReport& phi11_design() {
  static const DesignReport report = design(phi11_problem());
  return report;
}

/// The designed pulse with its centre-of-mass closure broken to |alpha| = 0.1
/// on slot (0, 1) while the stretch mode stays closed. The correction is the
/// minimum-norm sine series up to the harmonic resonant with the centre-of-mass
/// mode; low harmonics alone would need forces two orders of magnitude larger.
inline PulseSchedule broken_closure_pulse(double alpha_target = 0.1) {
  const DesignProblem p = phi11_problem();
  const PulseSchedule& closed = phi11_design().schedule;
  const double T = p.duration;
  const double wc = p.modes.frequencies[0], wr = p.modes.frequencies[1];
  const int n = std::max<int>(p.n_terms, static_cast<int>(std::lround(wc * T / kPi)));
  const double coeff = p.modes.mode_matrix(0, 0) / std::sqrt(2.0 * p.modes.mass * wc);

  Eigen::MatrixXd a(4, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> c(n, 0.0);
    c[j] = 1.0;
    const Waveform w = Waveform::fourier_sine(T, c);
    const Complex os = fourier_overlap(w, wr), oc = coeff * fourier_overlap(w, wc);
    a.col(j) << os.real(), os.imag(), oc.real(), oc.imag();
  }
  const Complex base = closure_residuals(coupling_table(closed, p.modes), T).at(0, 1, 0);
  const Complex shift = Complex(alpha_target, 0.0) - base;
  const Eigen::Vector4d b(0.0, 0.0, shift.real(), shift.imag());
  const Eigen::VectorXd dx = a.completeOrthogonalDecomposition().solve(b);

  std::vector<double> coefs = closed.waveform({0, 1}).coefficients();
  coefs.resize(n, 0.0);
  for (int j = 0; j < n; ++j) coefs[j] += dx[j];
  PulseSchedule broken = closed;
  broken.set({0, 1}, Waveform::fourier_sine(T, coefs));
  return broken;
}

}  // namespace fixtures

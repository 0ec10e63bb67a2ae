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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qutrit/common.hpp"
#include "qutrit/gauge_engine.hpp"
#include "qutrit/trap_modes.hpp"

namespace qutrit {

template <class Scalar = double>
using QutritState = Eigen::Matrix<std::complex<Scalar>, 3, 1>;
template <class Scalar = double>
using TwoQutritState = Eigen::Matrix<std::complex<Scalar>, 9, 1>;
template <class Scalar = double>
using QutritGate = Eigen::Matrix<std::complex<Scalar>, 3, 3>;
template <class Scalar = double>
using TwoQutritGate = Eigen::Matrix<std::complex<Scalar>, 9, 9>;

/// |m> for a single qutrit.
template <class Scalar = double>
QutritState<Scalar> basis_state(int m) {
  require(m >= 0 && m < kLevels, "basis_state: level out of range");
  QutritState<Scalar> s = QutritState<Scalar>::Zero();
  s[m] = 1;
  return s;
}

/// |mn>, stored at index 3m + n.
template <class Scalar = double>
TwoQutritState<Scalar> basis_state(int m, int n) {
  require(m >= 0 && m < kLevels && n >= 0 && n < kLevels, "basis_state: level out of range");
  TwoQutritState<Scalar> s = TwoQutritState<Scalar>::Zero();
  s[3 * m + n] = 1;
  return s;
}

/// R_{mm'}(theta, phi): |m> -> cos(theta)|m> + i e^{i phi} sin(theta)|m'>,
/// |m'> -> i e^{-i phi} sin(theta)|m> + cos(theta)|m'>, identity on the third level.
template <class Scalar = double>
QutritGate<Scalar> rotation(int m, int mp, Scalar theta, Scalar phi) {
  require(m >= 0 && m < kLevels && mp >= 0 && mp < kLevels, "rotation: level out of range");
  require(m != mp, "rotation: levels must differ");
  using C = std::complex<Scalar>;
  const C i(0, 1);
  QutritGate<Scalar> r = QutritGate<Scalar>::Identity();
  r(m, m) = std::cos(theta);
  r(mp, mp) = std::cos(theta);
  r(mp, m) = i * std::polar(Scalar(1), phi) * std::sin(theta);
  r(m, mp) = i * std::polar(Scalar(1), -phi) * std::sin(theta);
  return r;
}

/// 3x3 operator embedded on one ion of a pair (ion 0 is the left factor).
template <class Scalar = double>
TwoQutritGate<Scalar> on_ion(const QutritGate<Scalar>& gate, int ion) {
  require(ion == 0 || ion == 1, "on_ion: ion must be 0 or 1");
  TwoQutritGate<Scalar> out = TwoQutritGate<Scalar>::Zero();
  for (int a = 0; a < kLevels; ++a)
    for (int b = 0; b < kLevels; ++b)
      for (int c = 0; c < kLevels; ++c) {
        if (ion == 0) out(3 * a + c, 3 * b + c) = gate(a, b);
        else out(3 * c + a, 3 * c + b) = gate(a, b);
      }
  return out;
}

/// D_m^{(ion)}(phi) = exp(-i phi sigma_mm): a single-qutrit phase factor.
struct LocalPhase {
  int ion = 0;
  int level = 0;
  double phi = 0.0;

  template <class Scalar = double>
  QutritGate<Scalar> matrix() const {
    QutritGate<Scalar> d = QutritGate<Scalar>::Identity();
    d(level, level) = std::polar(Scalar(1), Scalar(-phi));
    return d;
  }
  /// Embedded on the two-qutrit space.
  TwoQutritGate<double> two_qutrit() const { return on_ion(matrix<double>(), ion); }
};

template <class Scalar = double>
QutritGate<Scalar> phase_gate_single(int level, Scalar phi) {
  require(level >= 0 && level < kLevels, "phase_gate_single: level out of range");
  return LocalPhase{0, level, static_cast<double>(phi)}.matrix<Scalar>();
}

inline LocalPhase phase_gate_single(int ion, int level, double phi) {
  require(level >= 0 && level < kLevels, "phase_gate_single: level out of range");
  require(ion >= 0, "phase_gate_single: ion index must be >= 0");
  return LocalPhase{ion, level, phi};
}

/// P_mn(Phi) = exp(-i Phi sigma_mm (x) sigma_nn).
template <class Scalar = double>
TwoQutritGate<Scalar> phase_gate_two(int m, int n, Scalar Phi) {
  require(m >= 0 && m < kLevels && n >= 0 && n < kLevels, "phase_gate_two: level out of range");
  TwoQutritGate<Scalar> p = TwoQutritGate<Scalar>::Identity();
  p(3 * m + n, 3 * m + n) = std::polar(Scalar(1), -Phi);
  return p;
}

/// Pure conditional phase gate prod_mn P_mn(target_mn).
TwoQutritGate<double> conditional_phase_gate(const Eigen::Matrix3d& target);

/// U(T) = [prod P_mn][prod D_m^(1)][prod D_m^(2)], i.e. the diagonal with
/// exp(-i [Phi_mn + phi_{1,m} + phi_{2,n}]) at |mn>.
TwoQutritGate<double> evolution_from_phases(const GaugePhases& phases);

/// Largest deviation of U^dagger U from the identity.
template <class Derived>
double unitarity_error(const Eigen::MatrixBase<Derived>& u) {
  const auto n = u.rows();
  return (u.adjoint() * u - Derived::Identity(n, n)).cwiseAbs().maxCoeff();
}

/// Local phases that turn evolution_from_phases(phases) into the pure gate
/// conditional_phase_gate(target), up to a global phase. Requires
/// Phi - target = a_m + b_n (checked to 1e-9); throws InputError otherwise.
/// Phases are reduced to (-pi, pi]; vanishing ones are omitted.
std::vector<LocalPhase> compensation_sequence(const GaugePhases& phases, const Eigen::Matrix3d& target);

/// Product of local phases on the two-qutrit space (they commute).
TwoQutritGate<double> compose(const std::vector<LocalPhase>& gates);

/// How Delta_2 enters the base Hamiltonian.
///   literal: level 2 energy is Delta_2 (H_0 contains Delta_2 sigma_22)
///   stacked: level 2 energy is Delta_1 + Delta_2 (Delta_2 is the 1<->2 gap)
enum class LevelConvention { literal, stacked };

/// Internal part of exp(-i H_0 T) for one ion.
QutritGate<double> free_evolution(const TrapSpec& trap, double T, LevelConvention convention = LevelConvention::literal);

/// Per ion, the D gates undoing free_evolution: D_1(-E_1 T), D_2(-E_2 T)
/// with phases reduced mod 2pi to (-pi, pi].
std::vector<LocalPhase> frame_phase_correction(const TrapSpec& trap, double T,
                                               LevelConvention convention = LevelConvention::literal);

/// Von Neumann entropy (nats) of either qutrit's reduced state.
double schmidt_entropy(const TwoQutritState<double>& state);

/// Global-phase-insensitive overlap |<a|b>|.
double state_fidelity(const TwoQutritState<double>& a, const TwoQutritState<double>& b);

struct DemoStage {
  std::string name;
  TwoQutritState<double> state;
  double entropy = 0.0;
  double fidelity = 0.0;  // with the maximally entangled target
};

struct EntangleTranscript {
  std::vector<DemoStage> stages;
  /// Primed basis vectors |0'>, |1'>, |2'> as columns.
  QutritGate<double> primed_basis;
  double primed_residual = 0.0;  // max |stage2 - (1/sqrt3) sum |m m'>|
  int local_qutrit = 0;          // qutrit the final local sequence acts on
  bool right_to_left = true;     // operator product applied as written
  double final_fidelity = 0.0;
  bool success = false;
};

/// Two-qutrit maximal entanglement protocol: rotations to |+>|+>, diagonal
/// 2pi/3 conditional phases on |00>, |11>, |22>, then a local rotation
/// sequence. Every qutrit/order combination is tried; the first reaching
/// fidelity >= 1 - 1e-9 is recorded.
EntangleTranscript entangle_demo();

}  // namespace qutrit

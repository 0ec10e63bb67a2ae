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

#include "qutrit/qutrit_algebra.hpp"

#include <algorithm>
#include <cmath>

namespace qutrit {

namespace {

double wrap_phase(double phi) {
  double r = std::remainder(phi, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

}  // namespace

TwoQutritGate<double> conditional_phase_gate(const Eigen::Matrix3d& target) {
  TwoQutritGate<double> u = TwoQutritGate<double>::Zero();
  for (int m = 0; m < kLevels; ++m)
    for (int n = 0; n < kLevels; ++n) u(3 * m + n, 3 * m + n) = std::polar(1.0, -target(m, n));
  return u;
}

TwoQutritGate<double> evolution_from_phases(const GaugePhases& phases) {
  TwoQutritGate<double> u = TwoQutritGate<double>::Zero();
  for (int m = 0; m < kLevels; ++m)
    for (int n = 0; n < kLevels; ++n)
      u(3 * m + n, 3 * m + n) =
          std::polar(1.0, -(phases.phi_two(m, n) + phases.phi_single(0, m) + phases.phi_single(1, n)));
  return u;
}

std::vector<LocalPhase> compensation_sequence(const GaugePhases& phases, const Eigen::Matrix3d& target) {
  const Eigen::Matrix3d residual = phases.phi_two - target;
  // residual = a_m + b_n with the gauge b_0 = 0.
  Eigen::Vector3d a = residual.col(0);
  Eigen::Vector3d b;
  for (int n = 0; n < kLevels; ++n) b[n] = residual(0, n) - residual(0, 0);
  double misfit = 0.0;
  for (int m = 0; m < kLevels; ++m)
    for (int n = 0; n < kLevels; ++n) misfit = std::max(misfit, std::abs(residual(m, n) - a[m] - b[n]));
  if (misfit > 1e-9)
    throw InputError("compensation_sequence: residual is not compensable by local phases (misfit " +
                     std::to_string(misfit) + ")");

  std::vector<LocalPhase> out;
  for (int ion = 0; ion < 2; ++ion) {
    for (int m = 0; m < kLevels; ++m) {
      const double extra = (ion == 0 ? a[m] : b[m]) + phases.phi_single(ion, m);
      const double phi = wrap_phase(-extra);
      if (std::abs(phi) > 1e-12) out.push_back({ion, m, phi});
    }
  }
  return out;
}

TwoQutritGate<double> compose(const std::vector<LocalPhase>& gates) {
  TwoQutritGate<double> u = TwoQutritGate<double>::Identity();
  for (const auto& g : gates) u = g.two_qutrit() * u;
  return u;
}

namespace {

Eigen::Vector3d level_energies(const TrapSpec& trap, LevelConvention convention) {
  const double e2 = convention == LevelConvention::literal ? trap.delta2 : trap.delta1 + trap.delta2;
  return {0.0, trap.delta1, e2};
}

}  // namespace

QutritGate<double> free_evolution(const TrapSpec& trap, double T, LevelConvention convention) {
  const Eigen::Vector3d e = level_energies(trap, convention);
  QutritGate<double> u = QutritGate<double>::Zero();
  for (int m = 0; m < kLevels; ++m) u(m, m) = std::polar(1.0, -e[m] * T);
  return u;
}

std::vector<LocalPhase> frame_phase_correction(const TrapSpec& trap, double T, LevelConvention convention) {
  trap.validate();
  const Eigen::Vector3d e = level_energies(trap, convention);
  std::vector<LocalPhase> out;
  for (int ion = 0; ion < trap.n_ions; ++ion)
    for (int m = 1; m < kLevels; ++m) out.push_back({ion, m, wrap_phase(-e[m] * T)});
  return out;
}

double schmidt_entropy(const TwoQutritState<double>& state) {
  Eigen::Matrix3cd amp;
  for (int m = 0; m < kLevels; ++m)
    for (int n = 0; n < kLevels; ++n) amp(m, n) = state[3 * m + n];
  const Eigen::Vector3d s = Eigen::JacobiSVD<Eigen::Matrix3cd>(amp).singularValues();
  const double norm = s.squaredNorm();
  double entropy = 0.0;
  for (int i = 0; i < kLevels; ++i) {
    const double p = s[i] * s[i] / norm;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return std::clamp(entropy, 0.0, std::log(3.0));
}

double state_fidelity(const TwoQutritState<double>& a, const TwoQutritState<double>& b) {
  return std::abs(a.dot(b));
}

EntangleTranscript entangle_demo() {
  EntangleTranscript tr;
  TwoQutritState<double> target = TwoQutritState<double>::Zero();
  for (int m = 0; m < kLevels; ++m) target[3 * m + m] = 1.0 / std::sqrt(3.0);

  auto record = [&](std::string name, const TwoQutritState<double>& s) {
    tr.stages.push_back({std::move(name), s, schmidt_entropy(s), state_fidelity(target, s)});
  };

  const TwoQutritState<double> start = basis_state(0, 0);
  record("initial |00>", start);

  // |+> = R_12(pi/4, -pi/2) R_01(arctan sqrt2, -pi/2) |0>
  const QutritGate<double> prep = rotation(1, 2, kPi / 4, -kPi / 2) * rotation(0, 1, std::atan(std::sqrt(2.0)), -kPi / 2);
  const TwoQutritState<double> plus_plus = on_ion(prep, 1) * (on_ion(prep, 0) * start);
  record("rotations to |+>|+>", plus_plus);

  TwoQutritGate<double> phases = TwoQutritGate<double>::Identity();
  for (int m = 0; m < kLevels; ++m) phases = phase_gate_two(m, m, 2.0 * kPi / 3.0) * phases;
  const TwoQutritState<double> primed = phases * plus_plus;
  record("conditional phases P_00 P_11 P_22 (2pi/3)", primed);

  const std::complex<double> w = std::polar(1.0, -2.0 * kPi / 3.0);
  tr.primed_basis = QutritGate<double>::Constant(1.0 / std::sqrt(3.0));
  for (int m = 0; m < kLevels; ++m) tr.primed_basis(m, m) = w / std::sqrt(3.0);
  TwoQutritState<double> expected = TwoQutritState<double>::Zero();
  for (int m = 0; m < kLevels; ++m)
    for (int n = 0; n < kLevels; ++n) expected[3 * m + n] = tr.primed_basis(n, m) / std::sqrt(3.0);
  tr.primed_residual = (primed - expected).cwiseAbs().maxCoeff();

  // R_01(pi/4, 5pi/6) R_02(arctan(1/sqrt2), 5pi/6) R_12(pi/4, pi) D_1(pi/6)
  const std::vector<QutritGate<double>> ops{
      rotation(0, 1, kPi / 4, 5 * kPi / 6), rotation(0, 2, std::atan(1.0 / std::sqrt(2.0)), 5 * kPi / 6),
      rotation(1, 2, kPi / 4, kPi), phase_gate_single(1, kPi / 6)};

  TwoQutritState<double> final_state = primed;
  tr.final_fidelity = -1.0;
  bool found = false;
  for (bool rtl : {true, false}) {
    if (found) break;
    QutritGate<double> seq = QutritGate<double>::Identity();
    if (rtl) {
      for (const auto& op : ops) seq = seq * op;  // rightmost acts first
    } else {
      for (const auto& op : ops) seq = op * seq;  // leftmost acts first
    }
    for (int q = 0; q < 2 && !found; ++q) {
      const TwoQutritState<double> out = on_ion(seq, q) * primed;
      const double f = state_fidelity(target, out);
      if (f > tr.final_fidelity) {
        tr.final_fidelity = f;
        tr.local_qutrit = q;
        tr.right_to_left = rtl;
        final_state = out;
      }
      found = f >= 1.0 - 1e-9;
    }
  }
  record("local sequence R_01 R_02 R_12 D_1", final_state);
  tr.success = tr.final_fidelity >= 1.0 - 1e-9;
  return tr;
}

}  // namespace qutrit

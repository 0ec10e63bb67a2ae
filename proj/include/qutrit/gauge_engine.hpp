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
#include <span>

#include "qutrit/pulses.hpp"

namespace qutrit {

/// Gate-defining phases of the gauged evolution for one ion pair.
///
/// phi_two(m, n) multiplies sigma_mm (first ion) sigma_nn (second ion);
/// phi_single(r, m) multiplies sigma_mm on the r-th ion of the pair.
struct GaugePhases {
  Eigen::Matrix3d phi_two = Eigen::Matrix3d::Zero();
  Eigen::Matrix<double, 2, 3> phi_single = Eigen::Matrix<double, 2, 3>::Zero();
  double duration = 0.0;
  double error_estimate = 0.0;
};

/// Ordered pair of ions the two-qutrit phases refer to.
struct IonPair {
  int first = 0;
  int second = 1;
};

inline constexpr double kPhaseTolerance = 1e-9;
inline constexpr double kAdiabaticTolerance = 1e-10;

/// K(a, b) = int_0^T dt int_0^t dt' a(t) b(t') sin w (t' - t) for every pair
/// drawn from `waveforms`, to absolute tolerance `tol`.
///
/// sin w(t'-t) is split into sin wt' cos wt - cos wt' sin wt, so the inner
/// integral reduces to two cumulative integrals per waveform evaluated on the
/// shared outer quadrature grid.
Eigen::MatrixXd sine_kernel_matrix(std::span<const Waveform> waveforms, double omega, double duration,
                                   double tol);

/// Exact (quadrature) phases Phi_mn(T) and phi_{mu,m}(T).
GaugePhases two_qutrit_phases(const CouplingTable& table, double duration, IonPair pair = {});

/// Phase of a single driven (ion, level) slot, summed over all modes.
/// Zero when nothing is driven; InputError when more than one slot is driven.
double single_qutrit_phase(const CouplingTable& table, double duration);

/// Slow-drive limit: Phi_mn = -2 sum_k int g g / w_k, phi = -sum_k int g^2 / w_k.
/// Never checks applicability; combine with adiabaticity_check.
GaugePhases adiabatic_phases(const CouplingTable& table, double duration, IonPair pair = {});

struct AdiabaticityCheck {
  double ratio = 0.0;
  bool evaluable = true;  // false when a driven waveform is piecewise constant
};

/// max over t, ion, level of |df/dt| / (sqrt(2 M w_c) w_c), w_c the lowest mode.
AdiabaticityCheck adiabaticity_check(const PulseSchedule& schedule, const ModeData& modes);

}  // namespace qutrit

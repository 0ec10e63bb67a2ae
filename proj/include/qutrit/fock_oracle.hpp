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
#include <optional>
#include <span>
#include <vector>

#include "qutrit/gauge_engine.hpp"
#include "qutrit/pulses.hpp"
#include "qutrit/qutrit_algebra.hpp"

namespace qutrit {

/// Exponential integrator used for each time step of the interaction-picture
/// Schroedinger equation.
///   midpoint: exp(-i h H(t + h/2)), second order
///   magnus4:  two exponentials at the Gauss nodes (commutator-free), fourth order
enum class StepScheme { midpoint, magnus4 };

struct FockConfig {
  int cutoff = 16;        // Fock levels 0..cutoff-1 per mode
  double dt_max = 0.25;   // step cap
  double tol = 1e-7;      // global propagation accuracy (state 2-norm)
  bool auto_grow = false; // double cutoff while leakage exceeds the threshold
  StepScheme scheme = StepScheme::magnus4;
  double leakage_threshold = 1e-6;
  int max_cutoff = 256;
  double step_safety = 0.1; // h <= step_safety / ||H||_est

  void validate() const;
};

struct ThermalSpec {
  double nbar = 0.0;
};

/// Truncated thermal distribution p_n = (1-x) x^n, x = nbar/(1+nbar), cut
/// where the tail drops below `tail` and renormalised.
std::vector<double> thermal_populations(double nbar, double tail = 1e-8);

/// Internal (x) motional state of two qutrits and their normal modes.
/// Index layout: (3m + n) * cutoff^modes + sum_k n_k cutoff^(modes-1-k).
struct JointState {
  Eigen::VectorXcd amplitudes;
  int cutoff = 0;
  int n_modes = 0;

  Eigen::Index motional_dim() const;
};

/// |psi_internal> (x) |n_0, n_1, ...>.
JointState product_state(const TwoQutritState<double>& internal, std::span<const int> fock, int cutoff);

struct PropagationStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  double min_step = 0.0;
  double leakage = 0.0;  // max over accepted steps of the top-two-level population
};

/// Solves i d/dt |psi> = H_I(t) |psi> over [0, T] for a two-ion schedule.
/// `time_offset` is the absolute interaction-picture time at which the
/// schedule starts, so consecutive pulses keep their e^{-i w_k t} phases.
/// Throws NumericalError on leakage above threshold (auto_grow is not applied
/// here because the state's cutoff is fixed) or when steps fall below the floor.
JointState propagate(const PulseSchedule& schedule, const ModeData& modes, const FockConfig& config,
                     const JointState& initial, PropagationStats* stats = nullptr, double time_offset = 0.0);

/// Back-to-back schedules, each starting where the previous one ended.
JointState propagate_sequence(std::span<const PulseSchedule> sequence, const ModeData& modes,
                              const FockConfig& config, const JointState& initial,
                              PropagationStats* stats = nullptr);

struct SimResult {
  TwoQutritGate<double> effective_unitary = TwoQutritGate<double>::Identity();
  double residual_entanglement = 0.0;
  double leakage = 0.0;
  std::optional<double> fidelity;
  int cutoff = 0;
  std::vector<int> motional_prep;
  bool trusted = true;
  PropagationStats stats;
};

/// Multiplies by a global phase so the largest-magnitude diagonal entry
/// (first one on ties within 1e-12) is real and positive.
TwoQutritGate<double> align_global_phase(const TwoQutritGate<double>& u);

/// Propagates |j> (x) |motional_prep> for all nine internal basis states.
/// effective_unitary(i, j) = <i, prep | psi_j(T)>, globally phase-aligned;
/// residual_entanglement = max_j (1 - |<prep | motional part of block j>|).
SimResult effective_internal_unitary(const PulseSchedule& schedule, const ModeData& modes,
                                     const FockConfig& config, std::span<const int> motional_prep);
SimResult effective_internal_unitary(std::span<const PulseSchedule> sequence, const ModeData& modes,
                                     const FockConfig& config, std::span<const int> motional_prep);

/// Single-mode propagators per internal block. H_I is a sum of commuting
/// single-mode terms inside each |mn> block, so the block's motional
/// evolution is the tensor product of these. result[k][3m+n] holds the first
/// `columns` columns of block |mn>'s mode-k propagator on `dim` Fock levels.
std::vector<std::vector<Eigen::MatrixXcd>> mode_propagators(const PulseSchedule& schedule, const ModeData& modes,
                                                            const FockConfig& config, int dim, int columns,
                                                            std::span<const double> column_weights = {},
                                                            PropagationStats* stats = nullptr);

/// The 12 probe states: the internal basis plus three Fourier-basis vectors.
std::vector<TwoQutritState<double>> fidelity_probes();

/// Average over probes of <t| Tr_motion[U (|psi><psi| (x) rho_th) U^dagger] |t>,
/// t = target |psi>, with rho_th the truncated thermal state on each mode.
double process_fidelity_thermal(const PulseSchedule& schedule, const ModeData& modes, const FockConfig& config,
                                const TwoQutritGate<double>& target, const ThermalSpec& thermal,
                                PropagationStats* stats = nullptr);

struct RefocusReport {
  PulseSchedule forward;
  PulseSchedule reversed;
  double closure_negation_error = 0.0;  // max |alpha(c) + alpha(cbar)|
  double phase_mismatch = 0.0;          // max |phases(c) - phases(cbar)|
  double forward_closure_max = 0.0;
};

/// (c, cbar) with cbar = every waveform negated, plus the consistency checks.
RefocusReport refocused_pair(const PulseSchedule& schedule, const ModeData& modes);

}  // namespace qutrit

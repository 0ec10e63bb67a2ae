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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qutrit/pulses.hpp"
#include "qutrit/trap_modes.hpp"

namespace qutrit {

/// Target value of one two-qutrit phase Phi_mn.
struct PhaseTarget {
  int m = 0;
  int n = 0;
  double value = 0.0;
};

/// Target value of one single-qutrit phase on a driven slot.
struct SingleTarget {
  Slot slot;
  double value = 0.0;
};

/// Pulse synthesis problem. Each driven slot carries an independent
/// Fourier-sine waveform sum_j x_j sin(j pi t / T), j = 1..n_terms.
struct DesignProblem {
  TrapSpec trap;
  ModeData modes;
  double duration = 0.0;
  std::vector<Slot> driven;
  int n_terms = 8;
  std::vector<PhaseTarget> two_qutrit;   // used when `single` is empty
  std::optional<SingleTarget> single;
  double weight = 1e6;                   // closure penalty weight
  std::uint64_t seed = 1;
  int max_evaluations = 10000;

  /// Throws InputError on malformed problems. Infeasibility (too few terms)
  /// is not an input error; design() reports it.
  void validate() const;
  /// Smallest n_terms with enough freedom for closure and phase.
  int min_terms() const { return 2 * modes.size() + 1; }
};

struct PhaseError {
  std::string label;  // "Phi_mn" or "phi_<ion>,<level>"
  double target = 0.0;
  double achieved = 0.0;
  double error = 0.0;
};

inline constexpr double kDesignClosureGoal = 1e-8;
inline constexpr double kDesignPhaseGoal = 1e-6;

struct DesignReport {
  PulseSchedule schedule;
  double closure_max = 0.0;
  std::vector<PhaseError> phase_errors;
  std::vector<double> objective_history;
  std::uint64_t seed = 0;
  bool success = false;
  bool infeasible = false;
  std::string method;           // "trivial", "projection", "penalty" or "none"
  std::string message;
  std::vector<int> reachable_signs;  // for a single target: signs of attainable values
  int null_space_dim = 0;
  double condition = 0.0;       // of the closure map on its row space
  long evaluations = 0;
  double max_force = 0.0;       // max |f| over driven slots, sampled

  double max_phase_error() const;
};

/// Closure by exact null-space projection, then phases:
/// one target by rescaling the best eigenvector of the reduced quadratic
/// form, several targets by seeded Levenberg-Marquardt with restarts.
/// All reported numbers are recomputed from the final schedule.
DesignReport design(const DesignProblem& problem);

struct ScanCell {
  double duration = 0.0;
  int n_terms = 0;
  bool success = false;
  bool infeasible = false;
  double closure_max = 0.0;
  double max_phase_error = 0.0;
  double max_force = 0.0;
};

/// design() on every (duration, n_terms) cell of the grid, durations outer.
std::vector<ScanCell> feasibility_scan(const DesignProblem& base, const std::vector<double>& durations,
                                       const std::vector<int>& n_terms);

}  // namespace qutrit

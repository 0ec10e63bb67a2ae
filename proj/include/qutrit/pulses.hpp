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
#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qutrit/common.hpp"
#include "qutrit/trap_modes.hpp"

namespace qutrit {

enum class WaveformKind { zero, piecewise_constant, fourier_sine, enveloped_carrier };

std::string to_string(WaveformKind kind);
WaveformKind waveform_kind_from_string(const std::string& name);

/// State-dependent force profile f(t) on [0, T]. The set of kinds is closed so
/// that every waveform can be written to and read from a schedule file.
///
///   piecewise_constant  values[i] on [breakpoints[i], breakpoints[i+1])
///   fourier_sine        sum_j A_j sin(j pi t / T), j = 1..n
///   enveloped_carrier   A sin^2(pi t / T) cos(w_d t + phase)
class Waveform {
 public:
  Waveform() = default;

  static Waveform zero(double duration);
  /// breakpoints run from 0 to T inclusive; values has one entry per interval.
  static Waveform piecewise_constant(std::vector<double> breakpoints, std::vector<double> values);
  static Waveform fourier_sine(double duration, std::vector<double> coefficients);
  static Waveform enveloped_carrier(double duration, double amplitude, double carrier_frequency,
                                    double phase);

  double operator()(double t) const;
  /// Analytic df/dt. Throws InputError for piecewise_constant.
  double derivative(double t) const;

  WaveformKind kind() const { return kind_; }
  double duration() const { return duration_; }
  bool is_zero() const;
  bool is_differentiable() const { return kind_ != WaveformKind::piecewise_constant; }

  /// Interior discontinuities, for quadrature panel splitting.
  std::vector<double> discontinuities() const;
  /// Highest angular frequency present in f, for quadrature panel sizing.
  double max_frequency() const;

  Waveform scaled(double s) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& coefficients() const { return values_; }
  double amplitude() const { return amplitude_; }
  double carrier_frequency() const { return carrier_; }
  double phase() const { return phase_; }

 private:
  WaveformKind kind_ = WaveformKind::zero;
  double duration_ = 1.0;
  std::vector<double> breakpoints_;
  std::vector<double> values_;  // piecewise values or Fourier coefficients
  double amplitude_ = 0.0;
  double carrier_ = 0.0;
  double phase_ = 0.0;
};

/// (ion, level) index of a force slot, both 0-based.
struct Slot {
  int ion = 0;
  int level = 0;
  auto operator<=>(const Slot&) const = default;
};

/// Force waveforms per (ion, level) slot sharing one gate duration.
/// Slots never set carry the zero waveform.
class PulseSchedule {
 public:
  PulseSchedule() = default;
  PulseSchedule(TrapSpec trap, double duration);

  void set(Slot slot, Waveform waveform);
  const Waveform& waveform(Slot slot) const;

  const TrapSpec& trap() const { return trap_; }
  double duration() const { return duration_; }
  /// Slots holding a non-zero waveform, ascending.
  std::vector<Slot> driven() const;
  /// All explicitly set slots (including explicit zeros), ascending.
  const std::map<Slot, Waveform>& entries() const { return entries_; }

  PulseSchedule scaled(double s) const;
  PulseSchedule negated() const { return scaled(-1.0); }

  std::vector<double> discontinuities() const;
  double max_frequency() const;

 private:
  TrapSpec trap_;
  double duration_ = 1.0;
  std::map<Slot, Waveform> entries_;
  Waveform zero_ = Waveform::zero(1.0);
};

/// Mode couplings g^k_{mu,m}(t) = D_{mu k} f_{mu,m}(t) / sqrt(2 M w_k).
class CouplingTable {
 public:
  CouplingTable(PulseSchedule schedule, ModeData modes);

  double operator()(int mode, Slot slot, double t) const {
    return coefficient(slot.ion, mode) * schedule_.waveform(slot)(t);
  }
  /// D_{mu k} / sqrt(2 M w_k).
  double coefficient(int ion, int mode) const { return coefficients_(ion, mode); }

  const PulseSchedule& schedule() const { return schedule_; }
  const ModeData& modes() const { return modes_; }
  int n_ions() const { return schedule_.trap().n_ions; }
  int n_modes() const { return modes_.size(); }

  /// Lamb-Dicke-style drive strength max over (k, mu, m, t) of |g| / w_k,
  /// sampled on a dense grid. Reported for the user's judgement; not capped.
  double drive_strength() const;

 private:
  PulseSchedule schedule_;
  ModeData modes_;
  Eigen::MatrixXd coefficients_;
};

CouplingTable coupling_table(const PulseSchedule& schedule, const ModeData& modes);

/// Loop-closure integrals alpha_{mu,m,k} = int_0^T g^k_{mu,m}(t) e^{-i w_k t} dt.
struct ClosureResidual {
  int n_ions = 0;
  int n_modes = 0;
  std::vector<Complex> alpha;  // flat [ion][level][mode]
  double max_abs = 0.0;
  double error_estimate = 0.0;

  Complex& at(int ion, int level, int mode) { return alpha[index(ion, level, mode)]; }
  Complex at(int ion, int level, int mode) const { return alpha[index(ion, level, mode)]; }

 private:
  std::size_t index(int ion, int level, int mode) const {
    return (static_cast<std::size_t>(ion) * kLevels + level) * n_modes + mode;
  }
};

/// Absolute quadrature tolerance for closure integrals.
inline constexpr double kClosureTolerance = 1e-12;

/// int_0^T f(t) e^{-i w t} dt for a bare waveform.
Complex fourier_overlap(const Waveform& f, double omega, double tol = kClosureTolerance);

ClosureResidual closure_residuals(const CouplingTable& table, double duration);

/// Per two-qutrit block |mn> (row 3m+n) and mode k (column), the coefficient
/// i (alpha_{0,m,k} + alpha_{1,n,k}) of a_k in the generator -i int H_I dt.
/// The coherent amplitude multiplying a_k^dagger is minus its conjugate.
/// All zero iff G(T) is the identity.
Eigen::Matrix<Complex, 9, Eigen::Dynamic> residual_displacements(const ClosureResidual& residual);

}  // namespace qutrit

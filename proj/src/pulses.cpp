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

#include "qutrit/pulses.hpp"

#include <algorithm>
#include <cmath>

#include "qutrit/quadrature.hpp"

namespace qutrit {

std::string to_string(WaveformKind kind) {
  switch (kind) {
    case WaveformKind::zero: return "zero";
    case WaveformKind::piecewise_constant: return "piecewise_constant";
    case WaveformKind::fourier_sine: return "fourier_sine";
    case WaveformKind::enveloped_carrier: return "enveloped_carrier";
  }
  return "zero";
}

WaveformKind waveform_kind_from_string(const std::string& name) {
  if (name == "zero") return WaveformKind::zero;
  if (name == "piecewise_constant") return WaveformKind::piecewise_constant;
  if (name == "fourier_sine") return WaveformKind::fourier_sine;
  if (name == "enveloped_carrier") return WaveformKind::enveloped_carrier;
  throw InputError("unknown waveform kind '" + name + "'");
}

// ---------------------------------------------------------------- Waveform

namespace {

void check_duration(double duration) {
  require(std::isfinite(duration) && duration > 0.0, "waveform: duration must be > 0");
}

void check_finite(const std::vector<double>& xs, const char* what) {
  for (double x : xs) require(std::isfinite(x), std::string("waveform: non-finite ") + what);
}

}  // namespace

Waveform Waveform::zero(double duration) {
  check_duration(duration);
  Waveform w;
  w.duration_ = duration;
  return w;
}

Waveform Waveform::piecewise_constant(std::vector<double> breakpoints, std::vector<double> values) {
  require(breakpoints.size() >= 2, "piecewise_constant: need at least two breakpoints");
  require(values.size() + 1 == breakpoints.size(),
          "piecewise_constant: values must have one entry per interval");
  check_finite(breakpoints, "breakpoint");
  check_finite(values, "value");
  require(breakpoints.front() == 0.0, "piecewise_constant: first breakpoint must be 0");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    require(breakpoints[i] > breakpoints[i - 1], "piecewise_constant: breakpoints must increase");
  Waveform w;
  w.kind_ = WaveformKind::piecewise_constant;
  w.duration_ = breakpoints.back();
  w.breakpoints_ = std::move(breakpoints);
  w.values_ = std::move(values);
  return w;
}

Waveform Waveform::fourier_sine(double duration, std::vector<double> coefficients) {
  check_duration(duration);
  check_finite(coefficients, "coefficient");
  Waveform w;
  w.kind_ = WaveformKind::fourier_sine;
  w.duration_ = duration;
  w.values_ = std::move(coefficients);
  return w;
}

Waveform Waveform::enveloped_carrier(double duration, double amplitude, double carrier_frequency,
                                     double phase) {
  check_duration(duration);
  require(std::isfinite(amplitude) && std::isfinite(carrier_frequency) && std::isfinite(phase),
          "enveloped_carrier: parameters must be finite");
  Waveform w;
  w.kind_ = WaveformKind::enveloped_carrier;
  w.duration_ = duration;
  w.amplitude_ = amplitude;
  w.carrier_ = carrier_frequency;
  w.phase_ = phase;
  return w;
}

double Waveform::operator()(double t) const {
  if (t < 0.0 || t > duration_) return 0.0;
  switch (kind_) {
    case WaveformKind::zero: return 0.0;
    case WaveformKind::piecewise_constant: {
      auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
      auto idx = static_cast<std::size_t>(std::distance(breakpoints_.begin(), it));
      idx = std::clamp<std::size_t>(idx, 1, values_.size());
      return values_[idx - 1];
    }
    case WaveformKind::fourier_sine: {
      if (t == 0.0 || t == duration_) return 0.0;
      double f = 0.0;
      const double x = kPi * t / duration_;
      for (std::size_t j = 0; j < values_.size(); ++j) f += values_[j] * std::sin((j + 1) * x);
      return f;
    }
    case WaveformKind::enveloped_carrier: {
      if (t == 0.0 || t == duration_) return 0.0;
      const double s = std::sin(kPi * t / duration_);
      return amplitude_ * s * s * std::cos(carrier_ * t + phase_);
    }
  }
  return 0.0;
}

double Waveform::derivative(double t) const {
  if (t < 0.0 || t > duration_) return 0.0;
  switch (kind_) {
    case WaveformKind::zero: return 0.0;
    case WaveformKind::piecewise_constant:
      throw InputError("piecewise_constant waveform is not differentiable");
    case WaveformKind::fourier_sine: {
      double d = 0.0;
      const double k = kPi / duration_;
      for (std::size_t j = 0; j < values_.size(); ++j)
        d += values_[j] * (j + 1) * k * std::cos((j + 1) * k * t);
      return d;
    }
    case WaveformKind::enveloped_carrier: {
      const double k = kPi / duration_;
      const double s = std::sin(k * t);
      const double arg = carrier_ * t + phase_;
      return amplitude_ * (k * std::sin(2.0 * k * t) * std::cos(arg) - s * s * carrier_ * std::sin(arg));
    }
  }
  return 0.0;
}

bool Waveform::is_zero() const {
  switch (kind_) {
    case WaveformKind::zero: return true;
    case WaveformKind::piecewise_constant:
    case WaveformKind::fourier_sine:
      return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    case WaveformKind::enveloped_carrier: return amplitude_ == 0.0;
  }
  return true;
}

std::vector<double> Waveform::discontinuities() const {
  if (kind_ != WaveformKind::piecewise_constant) return {};
  return {breakpoints_.begin() + 1, breakpoints_.end() - 1};
}

double Waveform::max_frequency() const {
  switch (kind_) {
    case WaveformKind::fourier_sine: return kPi * static_cast<double>(values_.size()) / duration_;
    case WaveformKind::enveloped_carrier: return std::abs(carrier_) + 2.0 * kPi / duration_;
    default: return 0.0;
  }
}

Waveform Waveform::scaled(double s) const {
  Waveform w = *this;
  for (double& v : w.values_) v *= s;
  w.amplitude_ *= s;
  return w;
}

// ----------------------------------------------------------- PulseSchedule

PulseSchedule::PulseSchedule(TrapSpec trap, double duration)
    : trap_(trap), duration_(duration), zero_(Waveform::zero(duration > 0 ? duration : 1.0)) {
  trap_.validate();
  check_duration(duration);
}

void PulseSchedule::set(Slot slot, Waveform waveform) {
  require(slot.ion >= 0 && slot.ion < trap_.n_ions, "schedule: ion index out of range");
  require(slot.level >= 0 && slot.level < kLevels, "schedule: level must be 0, 1 or 2");
  require(std::abs(waveform.duration() - duration_) <= 1e-12 * duration_,
          "schedule: waveform duration differs from schedule duration");
  entries_[slot] = std::move(waveform);
}

const Waveform& PulseSchedule::waveform(Slot slot) const {
  auto it = entries_.find(slot);
  return it == entries_.end() ? zero_ : it->second;
}

std::vector<Slot> PulseSchedule::driven() const {
  std::vector<Slot> out;
  for (const auto& [slot, w] : entries_)
    if (!w.is_zero()) out.push_back(slot);
  return out;
}

PulseSchedule PulseSchedule::scaled(double s) const {
  PulseSchedule out = *this;
  for (auto& [slot, w] : out.entries_) w = w.scaled(s);
  return out;
}

std::vector<double> PulseSchedule::discontinuities() const {
  std::vector<double> out;
  for (const auto& [slot, w] : entries_) {
    auto d = w.discontinuities();
    out.insert(out.end(), d.begin(), d.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double PulseSchedule::max_frequency() const {
  double f = 0.0;
  for (const auto& [slot, w] : entries_) f = std::max(f, w.max_frequency());
  return f;
}

// ------------------------------------------------------------ CouplingTable

CouplingTable::CouplingTable(PulseSchedule schedule, ModeData modes)
    : schedule_(std::move(schedule)), modes_(std::move(modes)) {
  const int n = schedule_.trap().n_ions;
  if (modes_.size() != n || modes_.mode_matrix.rows() != n)
    throw InputError("coupling_table: schedule has " + std::to_string(n) + " ions but mode data has " +
                     std::to_string(modes_.size()) + " modes");
  coefficients_.resize(n, n);
  for (int mu = 0; mu < n; ++mu)
    for (int k = 0; k < n; ++k)
      coefficients_(mu, k) = modes_.mode_matrix(mu, k) / std::sqrt(2.0 * modes_.mass * modes_.frequencies[k]);
}

CouplingTable coupling_table(const PulseSchedule& schedule, const ModeData& modes) {
  return CouplingTable(schedule, modes);
}

double CouplingTable::drive_strength() const {
  const int samples = 4096;
  const double T = schedule_.duration();
  double best = 0.0;
  for (const auto& slot : schedule_.driven()) {
    const Waveform& w = schedule_.waveform(slot);
    double fmax = 0.0;
    for (int i = 0; i <= samples; ++i) fmax = std::max(fmax, std::abs(w(T * i / samples)));
    for (int k = 0; k < n_modes(); ++k)
      best = std::max(best, std::abs(coefficient(slot.ion, k)) * fmax / modes_.frequencies[k]);
  }
  return best;
}

// ------------------------------------------------------------------ closure

Complex fourier_overlap(const Waveform& f, double omega, double tol) {
  if (f.is_zero()) return {0.0, 0.0};
  const auto breaks = f.discontinuities();
  auto integrand = [&](double t) { return f(t) * std::polar(1.0, -omega * t); };
  return integrate(integrand, 0.0, f.duration(), breaks, f.max_frequency() + std::abs(omega), tol).value;
}

ClosureResidual closure_residuals(const CouplingTable& table, double duration) {
  const auto& schedule = table.schedule();
  require(std::abs(duration - schedule.duration()) <= 1e-12 * schedule.duration(),
          "closure_residuals: T differs from schedule duration");
  ClosureResidual res;
  res.n_ions = table.n_ions();
  res.n_modes = table.n_modes();
  res.alpha.assign(static_cast<std::size_t>(res.n_ions) * kLevels * res.n_modes, Complex{});

  const auto& freqs = table.modes().frequencies;
  for (const Slot& slot : schedule.driven()) {
    const Waveform& f = schedule.waveform(slot);
    const auto breaks = f.discontinuities();
    // All modes in one vector-valued pass.
    auto integrand = [&](double t) {
      Eigen::VectorXcd v(res.n_modes);
      const double ft = f(t);
      for (int k = 0; k < res.n_modes; ++k) v[k] = ft * std::polar(1.0, -freqs[k] * t);
      return v;
    };
    double cmax = 1.0;
    for (int k = 0; k < res.n_modes; ++k) cmax = std::max(cmax, std::abs(table.coefficient(slot.ion, k)));
    const auto q = integrate(integrand, 0.0, duration, breaks, f.max_frequency() + freqs.maxCoeff(),
                             kClosureTolerance / cmax);
    for (int k = 0; k < res.n_modes; ++k) {
      res.at(slot.ion, slot.level, k) = table.coefficient(slot.ion, k) * q.value[k];
    }
    res.error_estimate = std::max(res.error_estimate, q.error_estimate * cmax);
  }
  for (const auto& a : res.alpha) res.max_abs = std::max(res.max_abs, std::abs(a));
  return res;
}

Eigen::Matrix<Complex, 9, Eigen::Dynamic> residual_displacements(const ClosureResidual& residual) {
  require(residual.n_ions == 2, "residual_displacements: requires a two-ion residual");
  const Complex i{0.0, 1.0};
  Eigen::Matrix<Complex, 9, Eigen::Dynamic> out(9, residual.n_modes);
  for (int m = 0; m < kLevels; ++m)
    for (int n = 0; n < kLevels; ++n)
      for (int k = 0; k < residual.n_modes; ++k)
        out(3 * m + n, k) = i * (residual.at(0, m, k) + residual.at(1, n, k));
  return out;
}

}  // namespace qutrit

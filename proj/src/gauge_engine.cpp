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

#include "qutrit/gauge_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qutrit/quadrature.hpp"

namespace qutrit {

namespace {

Eigen::MatrixXd kernel_on_grid(std::span<const Waveform> wfs, double omega, const std::vector<double>& edges) {
  const GaussLegendreRule& rule = default_rule();
  const int nw = static_cast<int>(wfs.size());
  const int nq = rule.size();

  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(nw, nw);
  // Running integrals int_0^x f_b sin(w t') and int_0^x f_b cos(w t') at the panel start.
  Eigen::VectorXd sin_acc = Eigen::VectorXd::Zero(nw);
  Eigen::VectorXd cos_acc = Eigen::VectorXd::Zero(nw);

  Eigen::VectorXd fa(nw), s_t(nw), c_t(nw);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double x0 = edges[p];
    const double half = 0.5 * (edges[p + 1] - x0);
    const double mid = x0 + half;
    for (int i = 0; i < nq; ++i) {
      const double t = mid + half * rule.nodes[i];
      // Cumulative integrals from x0 to t on a mapped copy of the rule.
      const double h2 = 0.5 * (t - x0);
      s_t = sin_acc;
      c_t = cos_acc;
      for (int j = 0; j < nq; ++j) {
        const double tp = x0 + h2 * (1.0 + rule.nodes[j]);
        const double w = rule.weights[j] * h2;
        const double st = std::sin(omega * tp), ct = std::cos(omega * tp);
        for (int b = 0; b < nw; ++b) {
          const double fb = wfs[b](tp);
          s_t[b] += w * fb * st;
          c_t[b] += w * fb * ct;
        }
      }
      const double w = rule.weights[i] * half;
      const double so = std::sin(omega * t), co = std::cos(omega * t);
      for (int a = 0; a < nw; ++a) fa[a] = wfs[a](t);
      const Eigen::VectorXd inner = s_t * co - c_t * so;
      kernel.noalias() += (w * fa) * inner.transpose();
    }
    // Advance accumulators over the whole panel.
    for (int j = 0; j < nq; ++j) {
      const double tp = mid + half * rule.nodes[j];
      const double w = rule.weights[j] * half;
      const double st = std::sin(omega * tp), ct = std::cos(omega * tp);
      for (int b = 0; b < nw; ++b) {
        const double fb = wfs[b](tp);
        sin_acc[b] += w * fb * st;
        cos_acc[b] += w * fb * ct;
      }
    }
  }
  return kernel;
}

struct PairSlots {
  std::vector<Waveform> waveforms;
  int index[2][kLevels];  // -1 when the slot is not driven
};

PairSlots collect(const PulseSchedule& schedule, IonPair pair) {
  PairSlots out;
  const int ions[2] = {pair.first, pair.second};
  for (int r = 0; r < 2; ++r) {
    for (int m = 0; m < kLevels; ++m) {
      const Waveform& w = schedule.waveform({ions[r], m});
      if (w.is_zero()) {
        out.index[r][m] = -1;
      } else {
        out.index[r][m] = static_cast<int>(out.waveforms.size());
        out.waveforms.push_back(w);
      }
    }
  }
  return out;
}

void check_pair(const CouplingTable& table, double duration, IonPair pair) {
  require(std::abs(duration - table.schedule().duration()) <= 1e-12 * table.schedule().duration(),
          "gauge phases: T differs from schedule duration");
  require(table.n_ions() >= 2, "gauge phases: need at least two ions");
  require(pair.first != pair.second && pair.first >= 0 && pair.second >= 0 &&
              pair.first < table.n_ions() && pair.second < table.n_ions(),
          "gauge phases: invalid ion pair");
}

double coefficient_scale(const CouplingTable& table) {
  double c = 1.0;
  for (int mu = 0; mu < table.n_ions(); ++mu)
    for (int k = 0; k < table.n_modes(); ++k) c = std::max(c, std::abs(table.coefficient(mu, k)));
  return c * c * 2.0 * table.n_modes();
}

}  // namespace

Eigen::MatrixXd sine_kernel_matrix(std::span<const Waveform> waveforms, double omega, double duration,
                                   double tol) {
  require(duration > 0.0, "sine_kernel_matrix: duration must be > 0");
  if (waveforms.empty()) return {};
  std::vector<double> breaks;
  double fmax = std::abs(omega);
  for (const auto& w : waveforms) {
    auto d = w.discontinuities();
    breaks.insert(breaks.end(), d.begin(), d.end());
    fmax = std::max(fmax, w.max_frequency() + std::abs(omega));
  }

  Eigen::MatrixXd prev = kernel_on_grid(waveforms, omega, panel_edges(0.0, duration, breaks, fmax, 0));
  double err = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= 10; ++level) {
    Eigen::MatrixXd next = kernel_on_grid(waveforms, omega, panel_edges(0.0, duration, breaks, fmax, level));
    err = (next - prev).cwiseAbs().maxCoeff();
    prev = std::move(next);
    if (err <= tol) return prev;
  }
  throw NumericalError("sine_kernel_matrix: double integral did not converge", err);
}

GaugePhases two_qutrit_phases(const CouplingTable& table, double duration, IonPair pair) {
  check_pair(table, duration, pair);
  GaugePhases out;
  out.duration = duration;
  const PairSlots slots = collect(table.schedule(), pair);
  if (slots.waveforms.empty()) return out;

  const double tol = kPhaseTolerance / coefficient_scale(table);
  const int ions[2] = {pair.first, pair.second};
  for (int k = 0; k < table.n_modes(); ++k) {
    const Eigen::MatrixXd K = sine_kernel_matrix(slots.waveforms, table.modes().frequencies[k], duration, tol);
    const double c0 = table.coefficient(ions[0], k), c1 = table.coefficient(ions[1], k);
    for (int m = 0; m < kLevels; ++m) {
      for (int n = 0; n < kLevels; ++n) {
        const int a = slots.index[0][m], b = slots.index[1][n];
        if (a >= 0 && b >= 0) out.phi_two(m, n) += c0 * c1 * (K(a, b) + K(b, a));
      }
      for (int r = 0; r < 2; ++r) {
        const int a = slots.index[r][m];
        const double c = r == 0 ? c0 : c1;
        if (a >= 0) out.phi_single(r, m) += c * c * K(a, a);
      }
    }
  }
  out.error_estimate = kPhaseTolerance;
  return out;
}

double single_qutrit_phase(const CouplingTable& table, double duration) {
  require(std::abs(duration - table.schedule().duration()) <= 1e-12 * table.schedule().duration(),
          "single_qutrit_phase: T differs from schedule duration");
  const auto driven = table.schedule().driven();
  require(driven.size() <= 1, "single_qutrit_phase: more than one (ion, level) slot is driven");
  if (driven.empty()) return 0.0;

  const Slot slot = driven.front();
  const std::vector<Waveform> wf{table.schedule().waveform(slot)};
  const double tol = kPhaseTolerance / coefficient_scale(table);
  double phi = 0.0;
  for (int k = 0; k < table.n_modes(); ++k) {
    const double c = table.coefficient(slot.ion, k);
    phi += c * c * sine_kernel_matrix(wf, table.modes().frequencies[k], duration, tol)(0, 0);
  }
  return phi;
}

GaugePhases adiabatic_phases(const CouplingTable& table, double duration, IonPair pair) {
  check_pair(table, duration, pair);
  GaugePhases out;
  out.duration = duration;
  const PairSlots slots = collect(table.schedule(), pair);
  const int nw = static_cast<int>(slots.waveforms.size());
  if (nw == 0) return out;

  std::vector<double> breaks;
  double fmax = 0.0;
  for (const auto& w : slots.waveforms) {
    auto d = w.discontinuities();
    breaks.insert(breaks.end(), d.begin(), d.end());
    fmax = std::max(fmax, 2.0 * w.max_frequency());
  }
  // Gram matrix int_0^T f_a f_b dt.
  auto integrand = [&](double t) {
    Eigen::VectorXd f(nw);
    for (int a = 0; a < nw; ++a) f[a] = slots.waveforms[a](t);
    Eigen::MatrixXd g = f * f.transpose();
    return g;
  };
  const Eigen::MatrixXd gram =
      integrate(integrand, 0.0, duration, breaks, fmax, kAdiabaticTolerance / coefficient_scale(table)).value;

  const int ions[2] = {pair.first, pair.second};
  for (int k = 0; k < table.n_modes(); ++k) {
    const double wk = table.modes().frequencies[k];
    const double c0 = table.coefficient(ions[0], k), c1 = table.coefficient(ions[1], k);
    for (int m = 0; m < kLevels; ++m) {
      for (int n = 0; n < kLevels; ++n) {
        const int a = slots.index[0][m], b = slots.index[1][n];
        if (a >= 0 && b >= 0) out.phi_two(m, n) -= 2.0 * c0 * c1 * gram(a, b) / wk;
      }
      for (int r = 0; r < 2; ++r) {
        const int a = slots.index[r][m];
        const double c = r == 0 ? c0 : c1;
        if (a >= 0) out.phi_single(r, m) -= c * c * gram(a, a) / wk;
      }
    }
  }
  out.error_estimate = kAdiabaticTolerance;
  return out;
}

namespace {

/// max_t |g(t)| on [0, T]: dense sampling, then golden-section refinement
/// around the best few samples.
template <class G>
double max_abs_on(const G& g, double T, int samples) {
  std::vector<std::pair<double, int>> vals;
  vals.reserve(samples + 1);
  for (int i = 0; i <= samples; ++i) vals.emplace_back(std::abs(g(T * i / samples)), i);
  std::partial_sort(vals.begin(), vals.begin() + std::min<int>(8, samples + 1), vals.end(),
                    [](auto& x, auto& y) { return x.first > y.first; });
  double best = vals.front().first;
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int c = 0; c < std::min<int>(8, samples + 1); ++c) {
    double lo = std::max(0.0, T * (vals[c].second - 1) / samples);
    double hi = std::min(T, T * (vals[c].second + 1) / samples);
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = std::abs(g(x1)), f2 = std::abs(g(x2));
    for (int it = 0; it < 100 && hi - lo > 1e-14 * T; ++it) {
      if (f1 > f2) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - invphi * (hi - lo); f1 = std::abs(g(x1));
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + invphi * (hi - lo); f2 = std::abs(g(x2));
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

}  // namespace

AdiabaticityCheck adiabaticity_check(const PulseSchedule& schedule, const ModeData& modes) {
  require(modes.size() >= 1, "adiabaticity_check: empty mode data");
  const double wc = modes.frequencies[0];
  const double scale = std::sqrt(2.0 * modes.mass * wc) * wc;
  AdiabaticityCheck out;
  for (const Slot& slot : schedule.driven()) {
    const Waveform& w = schedule.waveform(slot);
    if (!w.is_differentiable()) {
      out.ratio = std::numeric_limits<double>::infinity();
      out.evaluable = false;
      return out;
    }
    const double T = w.duration();
    const int samples = std::max(2000, static_cast<int>(50.0 * w.max_frequency() * T / (2.0 * kPi)));
    out.ratio = std::max(out.ratio, max_abs_on([&](double t) { return w.derivative(t); }, T, samples) / scale);
  }
  return out;
}

}  // namespace qutrit

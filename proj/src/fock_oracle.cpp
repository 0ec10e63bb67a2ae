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

#include "qutrit/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <utility>

namespace qutrit {

void FockConfig::validate() const {
  require(cutoff >= 4, "fock config: cutoff must be >= 4");
  require(max_cutoff >= cutoff, "fock config: max_cutoff must be >= cutoff");
  require(std::isfinite(tol) && tol > 0.0, "fock config: tol must be > 0");
  require(std::isfinite(dt_max) && dt_max > 0.0, "fock config: dt_max must be > 0");
  require(leakage_threshold > 0.0, "fock config: leakage_threshold must be > 0");
  require(step_safety > 0.0, "fock config: step_safety must be > 0");
}

std::vector<double> thermal_populations(double nbar, double tail) {
  require(std::isfinite(nbar) && nbar >= 0.0, "thermal: nbar must be >= 0");
  require(tail > 0.0 && tail < 1.0, "thermal: tail must be in (0, 1)");
  if (nbar == 0.0) return {1.0};
  const double x = nbar / (1.0 + nbar);
  // Tail beyond level L is x^L.
  const int levels = static_cast<int>(std::ceil(std::log(tail) / std::log(x)));
  if (levels > 100000) throw NumericalError("thermal: distribution too wide to truncate", x);
  std::vector<double> p(std::max(levels, 1));
  double sum = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) sum += (p[n] = (1.0 - x) * std::pow(x, static_cast<double>(n)));
  for (double& v : p) v /= sum;
  return p;
}

Eigen::Index JointState::motional_dim() const {
  Eigen::Index d = 1;
  for (int k = 0; k < n_modes; ++k) d *= cutoff;
  return d;
}

JointState product_state(const TwoQutritState<double>& internal, std::span<const int> fock, int cutoff) {
  require(cutoff >= 1, "product_state: cutoff must be >= 1");
  JointState s;
  s.cutoff = cutoff;
  s.n_modes = static_cast<int>(fock.size());
  const Eigen::Index md = s.motional_dim();
  Eigen::Index idx = 0;
  for (int n : fock) {
    require(n >= 0 && n < cutoff, "product_state: Fock index outside the cutoff");
    idx = idx * cutoff + n;
  }
  s.amplitudes = Eigen::VectorXcd::Zero(9 * md);
  for (int b = 0; b < 9; ++b) s.amplitudes[b * md + idx] = internal[b];
  return s;
}

namespace {

// ------------------------------------------------------------ Fock stepper

/// Block-diagonal space: `blocks` copies of a `modes`-mode Fock space.
struct FockSpace {
  int blocks = 1;
  int modes = 1;
  int cutoff = 4;
  Eigen::Index block_dim = 1;
  std::vector<Eigen::Index> stride;  // stride of mode k inside a block
  Eigen::VectorXd top_mask;          // 1 on states with any n_k >= cutoff - 2
  std::vector<Eigen::VectorXcd> ladder;  // sqrt(n_k + 1) at i, 0 where n_k = cutoff - 1

  FockSpace(int blocks_, int modes_, int cutoff_) : blocks(blocks_), modes(modes_), cutoff(cutoff_) {
    stride.assign(modes, 1);
    for (int k = modes - 2; k >= 0; --k) stride[k] = stride[k + 1] * cutoff;
    block_dim = modes == 0 ? 1 : stride[0] * cutoff;
    top_mask = Eigen::VectorXd::Zero(block_dim);
    for (Eigen::Index i = 0; i < block_dim; ++i)
      for (int k = 0; k < modes; ++k)
        if ((i / stride[k]) % cutoff >= cutoff - 2) top_mask[i] = 1.0;
    ladder.assign(modes, Eigen::VectorXcd::Zero(block_dim));
    for (int k = 0; k < modes; ++k)
      for (Eigen::Index i = 0; i < block_dim; ++i) {
        const Eigen::Index n = (i / stride[k]) % cutoff;
        if (n + 1 < cutoff) ladder[k][i] = std::sqrt(static_cast<double>(n + 1));
      }
  }
};

/// Fills z(b, k) = A_{bk}(tau) e^{-i w_k (tau + offset)} for the current local time.
using DriveFn = std::function<void(double tau, Eigen::MatrixXcd& z)>;

/// Row-major so that ladder operators touch contiguous rows.
using StateBlock = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Stepper {
 public:
  /// `column_weights`, when given, turns the step error into a weighted sum of
  /// column errors; otherwise the worst column counts.
  Stepper(const FockSpace& space, DriveFn drive, std::vector<char> active, const FockConfig& config,
          Eigen::VectorXd column_weights = {})
      : space_(space), drive_(std::move(drive)), active_(std::move(active)), config_(config),
        weights_(std::move(column_weights)) {
    z1_.resize(space_.blocks, space_.modes);
    z2_.resize(space_.blocks, space_.modes);
  }

  /// Leakage functional evaluated after every accepted step.
  using LeakFn = std::function<double(const StateBlock&)>;

  void run(StateBlock& psi, double duration, const LeakFn& leak, PropagationStats& stats) {
    const int order = config_.scheme == StepScheme::magnus4 ? 4 : 2;
    const double floor = 1e-9 * duration;
    double t = 0.0;
    double h = std::min(step_cap(0.0), duration);
    stats.min_step = duration;
    StateBlock full, half;
    while (t < duration * (1.0 - 1e-14)) {
      h = std::min({h, duration - t, step_cap(t)});
      full = psi;
      step(full, t, h);
      half = psi;
      step(half, t, 0.5 * h);
      step(half, t + 0.5 * h, 0.5 * h);
      const Eigen::RowVectorXd col_err = (full - half).colwise().norm();
      const double err = weights_.size() ? col_err.dot(weights_) : col_err.maxCoeff();
      const double budget = config_.tol * h / duration;
      if (err <= budget) {
        psi.swap(half);
        t += h;
        ++stats.accepted_steps;
        stats.min_step = std::min(stats.min_step, h);
        stats.leakage = std::max(stats.leakage, leak(psi));
        const double grow = err > 0.0 ? 0.9 * std::pow(budget / err, 1.0 / (order + 1)) : 2.0;
        h *= std::min(2.0, grow);
      } else {
        ++stats.rejected_steps;
        h *= std::max(0.1, 0.9 * std::pow(budget / err, 1.0 / (order + 1)));
        if (h < floor) throw NumericalError("propagate: step-refinement floor reached", err);
      }
    }
  }

 private:
  /// min(dt_max, 0.1 / ||H||_est) with ||H||_est = max_b sum_k |A_bk| sqrt(cutoff).
  double step_cap(double t) {
    drive_(t, z1_);
    double norm = 0.0;
    for (int b = 0; b < space_.blocks; ++b) {
      if (!active_[b]) continue;
      norm = std::max(norm, z1_.row(b).cwiseAbs().sum());
    }
    norm *= std::sqrt(static_cast<double>(space_.cutoff));
    return norm > 0.0 ? std::min(config_.dt_max, config_.step_safety / norm) : config_.dt_max;
  }

  void step(StateBlock& psi, double t, double h) {
    if (config_.scheme == StepScheme::midpoint) {
      drive_(t + 0.5 * h, z1_);
      expm_action(z1_, h, psi);
      return;
    }
    // Commutator-free fourth-order Magnus: the factor weighted towards the
    // earlier Gauss node acts first.
    static const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
    static const double a1 = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0, a2 = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;
    drive_(t + c1 * h, z1_);
    drive_(t + c2 * h, z2_);
    zf_ = a2 * z1_ + a1 * z2_;
    expm_action(zf_, h, psi);
    zf_ = a1 * z1_ + a2 * z2_;
    expm_action(zf_, h, psi);
  }

  /// out = H psi with H = -sum_k (z a_k + conj(z) a_k^dagger) per block.
  void apply(const Eigen::MatrixXcd& z, const StateBlock& in, StateBlock& out) const {
    out.setZero(in.rows(), in.cols());
    for (int b = 0; b < space_.blocks; ++b) {
      if (!active_[b]) continue;
      const Eigen::Index base = b * space_.block_dim;
      for (int k = 0; k < space_.modes; ++k) {
        const Complex zk = z(b, k);
        if (zk == Complex(0.0, 0.0)) continue;
        const Eigen::Index s = space_.stride[k];
        const Eigen::Index len = space_.block_dim - s;
        const auto amp = space_.ladder[k].head(len);
        out.middleRows(base, len).noalias() -= (zk * amp).asDiagonal() * in.middleRows(base + s, len);
        out.middleRows(base + s, len).noalias() -= (std::conj(zk) * amp).asDiagonal() * in.middleRows(base, len);
      }
    }
  }

  /// psi <- exp(-i h H(z)) psi by scaled Taylor series.
  void expm_action(const Eigen::MatrixXcd& z, double h, StateBlock& psi) {
    double norm = 0.0;
    for (int b = 0; b < space_.blocks; ++b)
      if (active_[b]) norm = std::max(norm, 2.0 * z.row(b).cwiseAbs().sum());
    norm *= std::sqrt(static_cast<double>(space_.cutoff - 1));
    if (norm == 0.0) return;
    const int sub = std::max(1, static_cast<int>(std::ceil(h * norm)));
    const double dt = h / sub;
    for (int s = 0; s < sub; ++s) {
      term_ = psi;
      const double scale = psi.norm();
      for (int j = 1; j <= 60; ++j) {
        apply(z, term_, tmp_);
        term_ = tmp_ * Complex(0.0, -dt / j);
        psi += term_;
        if (term_.norm() <= 1e-17 * scale) break;
      }
    }
  }

  const FockSpace& space_;
  DriveFn drive_;
  std::vector<char> active_;
  const FockConfig& config_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXcd z1_, z2_, zf_;
  StateBlock term_, tmp_;
};

// ------------------------------------------------------- two-ion drive data

/// Coupling coefficients and slot waveforms of a two-ion schedule.
struct TwoIonDrive {
  const PulseSchedule* schedule;
  Eigen::Matrix<double, 2, Eigen::Dynamic> coeff;  // D / sqrt(2 M w)
  Eigen::VectorXd freqs;
  bool driven[2][kLevels];

  TwoIonDrive(const PulseSchedule& s, const ModeData& modes) : schedule(&s) {
    require(s.trap().n_ions == 2, "fock oracle: only two-ion schedules are supported");
    const CouplingTable table(s, modes);
    coeff.resize(2, table.n_modes());
    for (int mu = 0; mu < 2; ++mu)
      for (int k = 0; k < table.n_modes(); ++k) coeff(mu, k) = table.coefficient(mu, k);
    freqs = modes.frequencies;
    for (int mu = 0; mu < 2; ++mu)
      for (int m = 0; m < kLevels; ++m) driven[mu][m] = !s.waveform({mu, m}).is_zero();
  }

  int n_modes() const { return static_cast<int>(freqs.size()); }

  void forces(double tau, double f[2][kLevels]) const {
    for (int mu = 0; mu < 2; ++mu)
      for (int m = 0; m < kLevels; ++m) f[mu][m] = driven[mu][m] ? schedule->waveform({mu, m})(tau) : 0.0;
  }
};

std::vector<char> active_blocks(const Eigen::VectorXcd& amplitudes, Eigen::Index block_dim) {
  std::vector<char> active(9, 0);
  for (int b = 0; b < 9; ++b) active[b] = !amplitudes.segment(b * block_dim, block_dim).isZero(0.0);
  return active;
}

JointState propagate_one(const PulseSchedule& schedule, const ModeData& modes, const FockConfig& config,
                         const JointState& initial, PropagationStats& stats, double time_offset) {
  const TwoIonDrive drive(schedule, modes);
  require(initial.n_modes == drive.n_modes(), "propagate: initial state has the wrong number of modes");
  require(initial.cutoff >= 4, "propagate: cutoff must be >= 4");
  const FockSpace space(9, initial.n_modes, initial.cutoff);
  require(initial.amplitudes.size() == 9 * space.block_dim, "propagate: initial state has the wrong dimension");
  require(std::abs(initial.amplitudes.norm() - 1.0) < 1e-10, "propagate: initial state is not normalised");

  auto fill = [&drive, time_offset](double tau, Eigen::MatrixXcd& z) {
    double f[2][kLevels];
    drive.forces(tau, f);
    for (int k = 0; k < drive.n_modes(); ++k) {
      const Complex phase = std::polar(1.0, -drive.freqs[k] * (tau + time_offset));
      for (int m = 0; m < kLevels; ++m)
        for (int n = 0; n < kLevels; ++n)
          z(3 * m + n, k) = (drive.coeff(0, k) * f[0][m] + drive.coeff(1, k) * f[1][n]) * phase;
    }
  };

  Stepper stepper(space, fill, active_blocks(initial.amplitudes, space.block_dim), config);
  StateBlock psi = initial.amplitudes;
  auto leak = [&space](const StateBlock& v) {
    double pop = 0.0;
    for (int b = 0; b < 9; ++b)
      pop += (space.top_mask.array() * v.middleRows(b * space.block_dim, space.block_dim).col(0).array().abs2()).sum();
    return pop;
  };
  stepper.run(psi, schedule.duration(), leak, stats);
  if (stats.leakage > config.leakage_threshold)
    throw NumericalError("propagate: population reached the top Fock levels", stats.leakage);

  JointState out = initial;
  out.amplitudes = psi.col(0);
  return out;
}

}  // namespace

JointState propagate(const PulseSchedule& schedule, const ModeData& modes, const FockConfig& config,
                     const JointState& initial, PropagationStats* stats, double time_offset) {
  config.validate();
  PropagationStats local;
  JointState out = propagate_one(schedule, modes, config, initial, local, time_offset);
  if (stats) *stats = local;
  return out;
}

JointState propagate_sequence(std::span<const PulseSchedule> sequence, const ModeData& modes,
                              const FockConfig& config, const JointState& initial, PropagationStats* stats) {
  config.validate();
  PropagationStats total;
  JointState state = initial;
  double offset = 0.0;
  for (const auto& schedule : sequence) {
    PropagationStats s;
    state = propagate_one(schedule, modes, config, state, s, offset);
    offset += schedule.duration();
    total.accepted_steps += s.accepted_steps;
    total.rejected_steps += s.rejected_steps;
    total.min_step = total.min_step == 0.0 ? s.min_step : std::min(total.min_step, s.min_step);
    total.leakage = std::max(total.leakage, s.leakage);
  }
  if (stats) *stats = total;
  return state;
}

TwoQutritGate<double> align_global_phase(const TwoQutritGate<double>& u) {
  const Eigen::VectorXd mags = u.diagonal().cwiseAbs();
  const double top = mags.maxCoeff();
  if (top == 0.0) return u;
  int idx = 0;
  while (mags[idx] < top - 1e-12) ++idx;
  const Complex d = u(idx, idx);
  return u * (std::conj(d) / std::abs(d));
}

SimResult effective_internal_unitary(std::span<const PulseSchedule> sequence, const ModeData& modes,
                                     const FockConfig& config, std::span<const int> motional_prep) {
  config.validate();
  require(!sequence.empty(), "effective_internal_unitary: empty pulse sequence");
  require(static_cast<int>(motional_prep.size()) == modes.size(),
          "effective_internal_unitary: motional preparation needs one Fock index per mode");

  FockConfig cfg = config;
  for (int n : motional_prep) require(n >= 0, "effective_internal_unitary: negative Fock index");
  while (true) {
    const int need = *std::max_element(motional_prep.begin(), motional_prep.end()) + 3;
    if (cfg.cutoff < need) cfg.cutoff = need;
    try {
      SimResult res;
      res.cutoff = cfg.cutoff;
      res.motional_prep.assign(motional_prep.begin(), motional_prep.end());
      TwoQutritGate<double> raw = TwoQutritGate<double>::Zero();
      for (int j = 0; j < 9; ++j) {
        const JointState in = product_state(basis_state(j / 3, j % 3), motional_prep, cfg.cutoff);
        PropagationStats s;
        const JointState out = propagate_sequence(sequence, modes, cfg, in, &s);
        const Eigen::Index md = out.motional_dim();
        Eigen::Index prep_idx = 0;
        for (int n : motional_prep) prep_idx = prep_idx * cfg.cutoff + n;
        for (int i = 0; i < 9; ++i) raw(i, j) = out.amplitudes[i * md + prep_idx];
        // Motional part of block j against the prepared state.
        const Eigen::VectorXcd block = out.amplitudes.segment(j * md, md);
        const double nrm = block.norm();
        const double overlap = nrm > 0.0 ? std::abs(block[prep_idx]) / nrm : 0.0;
        res.residual_entanglement = std::max(res.residual_entanglement, std::clamp(1.0 - overlap, 0.0, 1.0));
        res.leakage = std::max(res.leakage, s.leakage);
        res.stats.accepted_steps += s.accepted_steps;
        res.stats.rejected_steps += s.rejected_steps;
        res.stats.min_step = j == 0 ? s.min_step : std::min(res.stats.min_step, s.min_step);
      }
      res.stats.leakage = res.leakage;
      res.effective_unitary = align_global_phase(raw);
      res.trusted = res.leakage < cfg.leakage_threshold;
      return res;
    } catch (const NumericalError& e) {
      if (!cfg.auto_grow || cfg.cutoff * 2 > cfg.max_cutoff) throw;
      if (std::string(e.what()).find("top Fock levels") == std::string::npos) throw;
      cfg.cutoff *= 2;
    }
  }
}

SimResult effective_internal_unitary(const PulseSchedule& schedule, const ModeData& modes,
                                     const FockConfig& config, std::span<const int> motional_prep) {
  return effective_internal_unitary(std::span<const PulseSchedule>(&schedule, 1), modes, config, motional_prep);
}

std::vector<std::vector<Eigen::MatrixXcd>> mode_propagators(const PulseSchedule& schedule, const ModeData& modes,
                                                            const FockConfig& config, int dim, int columns,
                                                            std::span<const double> column_weights,
                                                            PropagationStats* stats) {
  config.validate();
  require(dim >= 4 && columns >= 1 && columns <= dim, "mode_propagators: invalid dimensions");
  require(column_weights.empty() || static_cast<int>(column_weights.size()) == columns,
          "mode_propagators: one weight per column");
  const TwoIonDrive drive(schedule, modes);
  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(dim, columns);

  // Weighted columns are split where the remaining weight drops by 1e-2, so
  // low-weight columns take longer steps and high-weight ones a smaller basis.
  std::vector<int> chunks{0};
  if (!column_weights.empty()) {
    double tail = std::accumulate(column_weights.begin(), column_weights.end(), 0.0);
    double next = 1e-2 * tail;
    for (int j = 0; j < columns; ++j) {
      if (tail < next && j - chunks.back() >= 4) {
        chunks.push_back(j);
        while (tail < next) next *= 1e-2;
      }
      tail -= column_weights[j];
    }
  }
  chunks.push_back(columns);
  const int headroom = dim - columns;
  FockConfig chunk_config = config;
  chunk_config.tol = config.tol / static_cast<double>(chunks.size() - 1);

  std::vector<std::vector<Eigen::MatrixXcd>> out(drive.n_modes());
  PropagationStats total;
  for (int k = 0; k < drive.n_modes(); ++k) {
    // Blocks with the same pair of driven slots share a propagator.
    std::map<std::pair<int, int>, int> unique;
    std::vector<std::pair<int, int>> keys;
    int block_key[9];
    for (int b = 0; b < 9; ++b) {
      const int m = b / 3, n = b % 3;
      const std::pair<int, int> key{drive.driven[0][m] ? m : -1, drive.driven[1][n] ? n : -1};
      if (key == std::pair<int, int>{-1, -1}) {
        block_key[b] = -1;
        continue;
      }
      auto [it, inserted] = unique.emplace(key, static_cast<int>(keys.size()));
      if (inserted) keys.push_back(key);
      block_key[b] = it->second;
    }
    std::vector<Eigen::MatrixXcd> props(keys.size());
    if (!keys.empty()) {
      const int nb = static_cast<int>(keys.size());
      double leakage_k = 0.0;
      const double c0 = drive.coeff(0, k), c1 = drive.coeff(1, k), wk = drive.freqs[k];
      auto fill = [&](double tau, Eigen::MatrixXcd& z) {
        double f[2][kLevels];
        drive.forces(tau, f);
        const Complex phase = std::polar(1.0, -wk * tau);
        for (int u = 0; u < nb; ++u) {
          double a = 0.0;
          if (keys[u].first >= 0) a += c0 * f[0][keys[u].first];
          if (keys[u].second >= 0) a += c1 * f[1][keys[u].second];
          z(u, 0) = a * phase;
        }
      };
      for (auto& m : props) m = Eigen::MatrixXcd::Zero(dim, columns);
      for (std::size_t c = 0; c + 1 < chunks.size(); ++c) {
        const int lo = chunks[c], hi = chunks[c + 1], width = hi - lo;
        // A chunk only needs its top column plus the displacement headroom.
        const int cdim = std::min(dim, hi + headroom);
        const FockSpace space(nb, 1, cdim);
        StateBlock psi = StateBlock::Zero(nb * cdim, width);
        for (int u = 0; u < nb; ++u)
          for (int j = 0; j < width; ++j) psi(u * cdim + lo + j, j) = 1.0;
        Eigen::VectorXd weights;
        if (!column_weights.empty())
          weights = Eigen::Map<const Eigen::VectorXd>(column_weights.data() + lo, width) / std::sqrt(double(nb));
        auto leak = [&](const StateBlock& v) {
          double worst = 0.0;
          for (int u = 0; u < nb; ++u) {
            const Eigen::VectorXd pops =
                (space.top_mask.asDiagonal() * v.middleRows(u * cdim, cdim).cwiseAbs2()).colwise().sum().transpose();
            worst = std::max(worst, weights.size() ? pops.dot(weights) * std::sqrt(double(nb)) : pops.maxCoeff());
          }
          return worst;
        };
        Stepper stepper(space, fill, std::vector<char>(nb, 1), chunk_config, weights);
        PropagationStats s;
        stepper.run(psi, schedule.duration(), leak, s);
        total.accepted_steps += s.accepted_steps;
        total.rejected_steps += s.rejected_steps;
        total.min_step = total.min_step == 0.0 ? s.min_step : std::min(total.min_step, s.min_step);
        leakage_k += s.leakage;
        for (int u = 0; u < nb; ++u) props[u].block(0, lo, cdim, width) = psi.middleRows(u * cdim, cdim);
      }
      total.leakage = std::max(total.leakage, leakage_k);
    }
    out[k].resize(9);
    for (int b = 0; b < 9; ++b) out[k][b] = block_key[b] < 0 ? identity : props[block_key[b]];
  }
  if (stats) *stats = total;
  return out;
}

std::vector<TwoQutritState<double>> fidelity_probes() {
  std::vector<TwoQutritState<double>> probes;
  for (int b = 0; b < 9; ++b) probes.push_back(basis_state(b / 3, b % 3));
  for (int j = 0; j < 3; ++j) {
    TwoQutritState<double> f;
    for (int b = 0; b < 9; ++b) f[b] = std::polar(1.0 / 3.0, 2.0 * kPi * j * b / 9.0);
    probes.push_back(f);
  }
  return probes;
}

double process_fidelity_thermal(const PulseSchedule& schedule, const ModeData& modes, const FockConfig& config,
                                const TwoQutritGate<double>& target, const ThermalSpec& thermal,
                                PropagationStats* stats) {
  config.validate();
  const std::vector<double> p = thermal_populations(thermal.nbar);
  const int levels = static_cast<int>(p.size());

  FockConfig cfg = config;
  while (true) {
    const int dim = levels + cfg.cutoff;
    PropagationStats s;
    const auto props = mode_propagators(schedule, modes, cfg, dim, levels, p, &s);
    if (s.leakage > cfg.leakage_threshold) {
      if (cfg.auto_grow && 2 * cfg.cutoff <= cfg.max_cutoff) {
        cfg.cutoff *= 2;
        continue;
      }
      throw NumericalError("process_fidelity_thermal: population reached the top Fock levels", s.leakage);
    }
    if (stats) *stats = s;

    // Thermal-averaged overlaps O^k(b', b) = sum_n p_n <n| V_b'^dagger V_b |n>.
    const int nm = static_cast<int>(props.size());
    std::vector<Eigen::Matrix<Complex, 9, 9>> overlap(nm);
    const Eigen::Map<const Eigen::VectorXd> weights(p.data(), levels);
    for (int k = 0; k < nm; ++k)
      for (int b2 = 0; b2 < 9; ++b2)
        for (int b = 0; b < 9; ++b)
          overlap[k](b2, b) =
              (props[k][b2].conjugate().cwiseProduct(props[k][b]).colwise().sum().transpose().array() *
               weights.array().cast<Complex>())
                  .sum();
    Eigen::Matrix<Complex, 9, 9> total = Eigen::Matrix<Complex, 9, 9>::Ones();
    for (int k = 0; k < nm; ++k) total = total.cwiseProduct(overlap[k]);

    double fid = 0.0;
    const auto probes = fidelity_probes();
    for (const auto& psi : probes) {
      const TwoQutritState<double> t = target * psi;
      const TwoQutritState<double> w = t.conjugate().cwiseProduct(psi);
      // sum_{b,b'} conj(w_b') w_b O(b', b)
      fid += std::real(w.dot(total * w));
    }
    return std::clamp(fid / static_cast<double>(probes.size()), 0.0, 1.0);
  }
}

RefocusReport refocused_pair(const PulseSchedule& schedule, const ModeData& modes) {
  RefocusReport r;
  r.forward = schedule;
  r.reversed = schedule.negated();
  const CouplingTable tf(r.forward, modes), tr(r.reversed, modes);
  const ClosureResidual af = closure_residuals(tf, schedule.duration());
  const ClosureResidual ar = closure_residuals(tr, schedule.duration());
  r.forward_closure_max = af.max_abs;
  for (std::size_t i = 0; i < af.alpha.size(); ++i)
    r.closure_negation_error = std::max(r.closure_negation_error, std::abs(af.alpha[i] + ar.alpha[i]));
  if (schedule.trap().n_ions >= 2) {
    const GaugePhases pf = two_qutrit_phases(tf, schedule.duration());
    const GaugePhases pr = two_qutrit_phases(tr, schedule.duration());
    r.phase_mismatch = std::max((pf.phi_two - pr.phi_two).cwiseAbs().maxCoeff(),
                                (pf.phi_single - pr.phi_single).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace qutrit

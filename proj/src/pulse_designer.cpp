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

#include "qutrit/pulse_designer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "qutrit/gauge_engine.hpp"

namespace qutrit {

void DesignProblem::validate() const {
  trap.validate();
  require(std::isfinite(duration) && duration > 0.0, "design: T must be > 0");
  require(modes.size() >= 1, "design: mode data is empty");
  require(modes.mode_matrix.rows() == trap.n_ions, "design: mode data does not match the trap");
  require(!driven.empty(), "design: no driven slots");
  require(n_terms >= 1, "design: n_terms must be >= 1");
  require(weight > 0.0, "design: weight must be > 0");
  require(max_evaluations >= 1, "design: max_evaluations must be >= 1");
  for (std::size_t i = 0; i < driven.size(); ++i) {
    const Slot s = driven[i];
    require(s.ion >= 0 && s.ion < trap.n_ions && s.level >= 0 && s.level < kLevels, "design: slot out of range");
    for (std::size_t j = 0; j < i; ++j) require(driven[j] != s, "design: duplicate driven slot");
  }
  auto has = [this](Slot s) { return std::find(driven.begin(), driven.end(), s) != driven.end(); };
  if (single) {
    require(two_qutrit.empty(), "design: give either two-qutrit or single targets, not both");
    require(has(single->slot), "design: single target slot is not driven");
  } else {
    require(trap.n_ions >= 2 || two_qutrit.empty(), "design: two-qutrit targets need two ions");
    for (const auto& t : two_qutrit) {
      require(t.m >= 0 && t.m < kLevels && t.n >= 0 && t.n < kLevels, "design: target level out of range");
      require(has({0, t.m}) && has({1, t.n}), "design: target Phi_mn needs slots (0, m) and (1, n) driven");
    }
  }
}

double DesignReport::max_phase_error() const {
  double e = 0.0;
  for (const auto& p : phase_errors) e = std::max(e, p.error);
  return e;
}

namespace {

/// Linear and quadratic maps from stacked Fourier coefficients to closure
/// residuals and target phases.
struct Model {
  Eigen::MatrixXd closure;          // 2 real rows per (slot, mode)
  std::vector<Eigen::MatrixXd> q;   // symmetric forms, one per target
  Eigen::VectorXd targets;
  std::vector<std::string> labels;
};

Waveform unit_sine(double T, int n_terms, int j) {
  std::vector<double> c(n_terms, 0.0);
  c[j] = 1.0;
  return Waveform::fourier_sine(T, std::move(c));
}

Model build_model(const DesignProblem& p) {
  const int S = static_cast<int>(p.driven.size()), n = p.n_terms, K = p.modes.size();
  const double T = p.duration;
  std::vector<Waveform> basis;
  for (int j = 0; j < n; ++j) basis.push_back(unit_sine(T, n, j));

  Eigen::MatrixXd coeff(p.trap.n_ions, K);
  for (int mu = 0; mu < p.trap.n_ions; ++mu)
    for (int k = 0; k < K; ++k)
      coeff(mu, k) = p.modes.mode_matrix(mu, k) / std::sqrt(2.0 * p.modes.mass * p.modes.frequencies[k]);

  Model model;
  model.closure = Eigen::MatrixXd::Zero(2 * S * K, S * n);
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXcd overlap(n);
    for (int j = 0; j < n; ++j) overlap[j] = fourier_overlap(basis[j], p.modes.frequencies[k]);
    for (int s = 0; s < S; ++s) {
      const double c = coeff(p.driven[s].ion, k);
      const int row = 2 * (s * K + k);
      model.closure.block(row, s * n, 1, n) = c * overlap.real().transpose();
      model.closure.block(row + 1, s * n, 1, n) = c * overlap.imag().transpose();
    }
  }

  // Kernel between basis functions is the same for every slot.
  std::vector<Eigen::MatrixXd> kernel(K);
  for (int k = 0; k < K; ++k) kernel[k] = sine_kernel_matrix(basis, p.modes.frequencies[k], T, 1e-12 * std::max(1.0, T * T));

  auto slot_index = [&p](Slot s) {
    return static_cast<int>(std::find(p.driven.begin(), p.driven.end(), s) - p.driven.begin());
  };
  auto add_pair = [&](Eigen::MatrixXd& q, int a, int b, double scale, int k) {
    // phase += scale * sum_ij x_{a,i} x_{b,j} K(i, j), symmetrised.
    q.block(a * n, b * n, n, n) += 0.5 * scale * kernel[k];
    q.block(b * n, a * n, n, n) += 0.5 * scale * kernel[k].transpose();
  };

  if (p.single) {
    const int a = slot_index(p.single->slot);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(S * n, S * n);
    for (int k = 0; k < K; ++k) add_pair(q, a, a, std::pow(coeff(p.single->slot.ion, k), 2), k);
    model.q.push_back(q);
    model.targets = Eigen::VectorXd::Constant(1, p.single->value);
    model.labels.push_back("phi_" + std::to_string(p.single->slot.ion) + "," + std::to_string(p.single->slot.level));
  } else {
    model.targets.resize(static_cast<Eigen::Index>(p.two_qutrit.size()));
    for (std::size_t t = 0; t < p.two_qutrit.size(); ++t) {
      const auto& tg = p.two_qutrit[t];
      const int a = slot_index({0, tg.m}), b = slot_index({1, tg.n});
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(S * n, S * n);
      for (int k = 0; k < K; ++k) {
        const double cc = coeff(0, k) * coeff(1, k);
        add_pair(q, a, b, cc, k);
        add_pair(q, b, a, cc, k);
      }
      model.q.push_back(q);
      model.targets[static_cast<Eigen::Index>(t)] = tg.value;
      model.labels.push_back("Phi_" + std::to_string(tg.m) + std::to_string(tg.n));
    }
  }
  return model;
}

/// Residuals [sqrt(w) C B y; y^T Q_i y - t_i; zero padding] over reduced coordinates y.
struct Residual : Eigen::DenseFunctor<double> {
  Residual(const Eigen::MatrixXd& cb, std::vector<Eigen::MatrixXd> q, Eigen::VectorXd targets, double weight,
           long* counter)
      : Eigen::DenseFunctor<double>(static_cast<int>(cb.cols()),
                                    std::max<int>(static_cast<int>(cb.cols()),
                                                  static_cast<int>(cb.rows() + targets.size()))),
        cb_(std::sqrt(weight) * cb), q_(std::move(q)), targets_(std::move(targets)), counter_(counter) {}

  int operator()(const InputType& y, ValueType& r) const {
    ++*counter_;
    r.setZero(values());
    r.head(cb_.rows()) = cb_ * y;
    for (std::size_t i = 0; i < q_.size(); ++i)
      r[cb_.rows() + static_cast<Eigen::Index>(i)] = y.dot(q_[i] * y) - targets_[static_cast<Eigen::Index>(i)];
    return 0;
  }

  int df(const InputType& y, JacobianType& j) const {
    j.setZero(values(), inputs());
    j.topRows(cb_.rows()) = cb_;
    for (std::size_t i = 0; i < q_.size(); ++i)
      j.row(cb_.rows() + static_cast<Eigen::Index>(i)) = 2.0 * (q_[i] * y).transpose();
    return 0;
  }

 private:
  Eigen::MatrixXd cb_;
  std::vector<Eigen::MatrixXd> q_;
  Eigen::VectorXd targets_;
  long* counter_;
};

PulseSchedule build_schedule(const DesignProblem& p, const Eigen::VectorXd& x) {
  PulseSchedule schedule(p.trap, p.duration);
  for (std::size_t s = 0; s < p.driven.size(); ++s) {
    const Eigen::VectorXd c = x.segment(static_cast<Eigen::Index>(s) * p.n_terms, p.n_terms);
    schedule.set(p.driven[s], Waveform::fourier_sine(p.duration, std::vector<double>(c.data(), c.data() + c.size())));
  }
  return schedule;
}

/// Independent recomputation of every reported number from the schedule.
void evaluate(const DesignProblem& p, const Model& model, DesignReport& report) {
  const CouplingTable table(report.schedule, p.modes);
  report.closure_max = closure_residuals(table, p.duration).max_abs;
  report.phase_errors.clear();
  std::vector<double> achieved;
  if (p.single) {
    if (report.schedule.driven().size() <= 1) {
      achieved.push_back(single_qutrit_phase(table, p.duration));
    } else {
      const int ion = p.single->slot.ion;
      require(ion <= 1, "design: single target with several driven slots must sit on ion 0 or 1");
      achieved.push_back(two_qutrit_phases(table, p.duration).phi_single(ion, p.single->slot.level));
    }
  } else if (!p.two_qutrit.empty()) {
    const GaugePhases ph = two_qutrit_phases(table, p.duration);
    for (const auto& t : p.two_qutrit) achieved.push_back(ph.phi_two(t.m, t.n));
  }
  for (std::size_t i = 0; i < achieved.size(); ++i) {
    const double target = model.targets[static_cast<Eigen::Index>(i)];
    report.phase_errors.push_back({model.labels[i], target, achieved[i], std::abs(achieved[i] - target)});
  }
  report.max_force = 0.0;
  for (const Slot& s : report.schedule.driven()) {
    const Waveform& w = report.schedule.waveform(s);
    const int samples = 64 * p.n_terms;
    for (int i = 0; i <= samples; ++i) report.max_force = std::max(report.max_force, std::abs(w(p.duration * i / samples)));
  }
  report.success = report.closure_max < kDesignClosureGoal && report.max_phase_error() < kDesignPhaseGoal;
}

double objective(const DesignProblem& p, const Model& model, const Eigen::VectorXd& x) {
  double f = p.weight * (model.closure * x).squaredNorm();
  for (std::size_t i = 0; i < model.q.size(); ++i)
    f += std::pow(x.dot(model.q[i] * x) - model.targets[static_cast<Eigen::Index>(i)], 2);
  return f;
}

}  // namespace

DesignReport design(const DesignProblem& problem) {
  problem.validate();
  DesignReport report;
  report.seed = problem.seed;
  const int dim = static_cast<int>(problem.driven.size()) * problem.n_terms;

  if (problem.n_terms < problem.min_terms()) {
    report.infeasible = true;
    report.method = "none";
    report.message = "infeasible: n_terms = " + std::to_string(problem.n_terms) + " is below the floor " +
                     std::to_string(problem.min_terms()) + " (2 x modes + 1)";
    report.schedule = build_schedule(problem, Eigen::VectorXd::Zero(dim));
    return report;
  }

  const Model model = build_model(problem);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);

  if (model.targets.cwiseAbs().maxCoeff() == 0.0) {
    report.method = "trivial";
    report.objective_history = {0.0};
    report.schedule = build_schedule(problem, x);
    evaluate(problem, model, report);
    report.message = "all targets vanish";
    return report;
  }

  // Closure map and its null space.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(model.closure, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-12 * smax) ++rank;
  report.condition = rank > 0 ? smax / sv[rank - 1] : 1.0;
  const bool project = report.condition < 1e8;
  const Eigen::MatrixXd basis = project ? Eigen::MatrixXd(svd.matrixV().rightCols(dim - rank))
                                        : Eigen::MatrixXd::Identity(dim, dim);
  report.method = project ? "projection" : "penalty";
  report.null_space_dim = dim - rank;
  if (basis.cols() == 0) {
    report.infeasible = true;
    report.message = "infeasible: closure leaves no free coefficients";
    report.schedule = build_schedule(problem, x);
    evaluate(problem, model, report);
    return report;
  }

  std::vector<Eigen::MatrixXd> q_red;
  for (const auto& q : model.q) q_red.push_back(basis.transpose() * q * basis);

  report.objective_history.push_back(objective(problem, model, x));
  if (project && q_red.size() == 1) {
    // phase(s v) = s^2 phase(v): pick the eigenvector with the target's sign
    // and the largest |eigenvalue| so the force stays small.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q_red[0]);
    const Eigen::VectorXd lam = eig.eigenvalues();
    const double tiny = 1e-12 * lam.cwiseAbs().maxCoeff();
    if (lam.maxCoeff() > tiny) report.reachable_signs.push_back(1);
    if (lam.minCoeff() < -tiny) report.reachable_signs.push_back(-1);
    const double target = model.targets[0];
    const Eigen::Index pick = target > 0 ? Eigen::Index(lam.size() - 1) : Eigen::Index(0);
    report.evaluations = 1;
    if (target * lam[pick] > 0.0 && std::abs(lam[pick]) > tiny) {
      x = basis * (eig.eigenvectors().col(pick) * std::sqrt(target / lam[pick]));
    } else {
      report.message = "target sign is not reachable by this drive configuration";
    }
  } else {
    if (q_red.size() == 1) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q_red[0], Eigen::EigenvaluesOnly);
      const double tiny = 1e-12 * eig.eigenvalues().cwiseAbs().maxCoeff();
      if (eig.eigenvalues().maxCoeff() > tiny) report.reachable_signs.push_back(1);
      if (eig.eigenvalues().minCoeff() < -tiny) report.reachable_signs.push_back(-1);
    }
    const Eigen::MatrixXd cb = model.closure * basis;
    Residual functor(project ? Eigen::MatrixXd::Zero(0, basis.cols()) : cb, q_red, model.targets, problem.weight,
                     &report.evaluations);
    std::mt19937_64 rng(problem.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Initial scale matching the mean target magnitude.
    double qscale = 0.0;
    for (const auto& q : q_red) qscale = std::max(qscale, q.norm() / std::sqrt(static_cast<double>(q.rows())));
    const double start_norm = qscale > 0.0 ? std::sqrt(model.targets.cwiseAbs().mean() / qscale) : 1.0;

    Eigen::VectorXd best;
    double best_obj = std::numeric_limits<double>::infinity();
    while (report.evaluations < problem.max_evaluations) {
      Eigen::VectorXd y(basis.cols());
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = normal(rng);
      y *= start_norm / y.norm();
      Eigen::LevenbergMarquardt<Residual> lm(functor);
      lm.setMaxfev(static_cast<Eigen::Index>(problem.max_evaluations - report.evaluations));
      lm.setFtol(1e-15);
      lm.setXtol(1e-15);
      lm.setGtol(0.0);
      lm.minimize(y);
      const Eigen::VectorXd xc = basis * y;
      const double obj = objective(problem, model, xc);
      report.objective_history.push_back(obj);
      if (obj < best_obj) {
        best_obj = obj;
        best = xc;
      }
      double worst = 0.0;
      for (std::size_t i = 0; i < q_red.size(); ++i)
        worst = std::max(worst, std::abs(y.dot(q_red[i] * y) - model.targets[static_cast<Eigen::Index>(i)]));
      if (worst < 1e-3 * kDesignPhaseGoal && (project || (model.closure * xc).cwiseAbs().maxCoeff() < 1e-3 * kDesignClosureGoal))
        break;
    }
    x = best;
  }

  report.objective_history.push_back(objective(problem, model, x));
  report.schedule = build_schedule(problem, x);
  evaluate(problem, model, report);
  if (!report.success && report.message.empty())
    report.message = report.evaluations >= problem.max_evaluations ? "optimizer budget exhausted" : "goals not met";
  return report;
}

std::vector<ScanCell> feasibility_scan(const DesignProblem& base, const std::vector<double>& durations,
                                       const std::vector<int>& n_terms) {
  std::vector<ScanCell> out;
  for (double T : durations) {
    for (int n : n_terms) {
      DesignProblem p = base;
      p.duration = T;
      p.n_terms = n;
      const DesignReport r = design(p);
      out.push_back({T, n, r.success, r.infeasible, r.closure_max, r.max_phase_error(), r.max_force});
    }
  }
  return out;
}

}  // namespace qutrit

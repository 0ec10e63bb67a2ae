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

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "qutrit/pulse_designer.hpp"

using namespace qutrit;

namespace {

DesignProblem toy(double target) {
  DesignProblem p;
  p.trap = fixtures::one_ion();
  p.modes = normal_modes(p.trap);
  p.duration = 33.0;  // generic: w T not a multiple of pi
  p.driven = {{0, 1}};
  p.n_terms = 6;
  p.single = SingleTarget{{0, 1}, target};
  return p;
}

DesignProblem two_targets() {
  DesignProblem p = fixtures::phi11_problem();
  p.driven = {{0, 1}, {1, 1}, {0, 2}, {1, 2}};
  p.two_qutrit = {{1, 1, 2.0 * kPi / 3.0}, {2, 2, kPi / 2.0}};
  return p;
}

double phase_of(const DesignReport& r, const std::string& label) {
  for (const auto& e : r.phase_errors)
    if (e.label == label) return e.achieved;
  FAIL("missing phase " << label);
  return 0.0;
}

}  // namespace

TEST_CASE("malformed problems are input errors") {
  DesignProblem p = fixtures::phi11_problem();
  CHECK_NOTHROW(p.validate());
  p.duration = 0.0;
  CHECK_THROWS_AS(design(p), InputError);
  p = fixtures::phi11_problem();
  p.driven = {};
  CHECK_THROWS_AS(design(p), InputError);
  p = fixtures::phi11_problem();
  p.driven = {{2, 1}};
  CHECK_THROWS_AS(design(p), InputError);
  p = fixtures::phi11_problem();
  p.two_qutrit = {{0, 0, 0.3}};
  CHECK_THROWS_AS(design(p), InputError);
}

TEST_CASE("zero targets give the zero pulse") {
  DesignProblem p = fixtures::phi11_problem();
  p.two_qutrit = {{1, 1, 0.0}};
  const DesignReport r = design(p);
  CHECK(r.success);
  CHECK(r.method == "trivial");
  CHECK(r.closure_max == 0.0);
  CHECK(r.max_phase_error() == 0.0);
  CHECK(r.max_force == 0.0);
  for (const Slot& s : p.driven)
    for (double c : r.schedule.waveform(s).coefficients()) CHECK(c == 0.0);
  REQUIRE_FALSE(r.objective_history.empty());
  CHECK(r.objective_history.back() == 0.0);
}

TEST_CASE("single-mode toy: null space and quadratic scaling") {
  const DesignReport r = design(toy(-0.3));
  REQUIRE(r.success);
  CHECK(r.method == "projection");
  CHECK(r.null_space_dim == 6 - 2);
  CHECK(r.closure_max < kDesignClosureGoal);

  // Unit-norm direction v of the design; phase(s v) = s^2 phase(v).
  const std::vector<double>& x = r.schedule.waveform({0, 1}).coefficients();
  double norm = 0.0;
  for (double c : x) norm += c * c;
  norm = std::sqrt(norm);
  const PulseSchedule v = r.schedule.scaled(1.0 / norm);
  const ModeData modes = normal_modes(fixtures::one_ion());
  const double T = 33.0;
  const double phi_v = single_qutrit_phase(coupling_table(v, modes), T);
  const double s = std::sqrt(-0.3 / phi_v);
  CHECK(s == doctest::Approx(norm).epsilon(1e-9));
  CHECK(single_qutrit_phase(coupling_table(v.scaled(s), modes), T) == doctest::Approx(-0.3).epsilon(1e-9));

  // Four times the phase needs twice the amplitude along the same direction.
  const DesignReport r4 = design(toy(-1.2));
  REQUIRE(r4.success);
  const std::vector<double>& x4 = r4.schedule.waveform({0, 1}).coefficients();
  for (std::size_t j = 0; j < x.size(); ++j) CHECK(x4[j] == doctest::Approx(2.0 * x[j]).epsilon(1e-9));
}

TEST_CASE("unreachable sign is reported, not flipped") {
  const DesignReport r = design(toy(0.3));
  CHECK_FALSE(r.success);
  CHECK_FALSE(r.infeasible);
  REQUIRE(r.reachable_signs.size() == 1);
  CHECK(r.reachable_signs[0] == -1);
  CHECK(r.message.find("not reachable") != std::string::npos);
}

TEST_CASE("gate pulse for Phi_11 = 2 pi / 3") {
  const DesignReport& r = fixtures::phi11_design();
  CHECK(r.success);
  CHECK(r.closure_max < 1e-8);
  CHECK(r.max_phase_error() < 1e-6);
  CHECK(phase_of(r, "Phi_11") == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-9));
  // Both signs are attainable with two driven slots.
  CHECK(r.reachable_signs.size() == 2);
  // The two ions are pushed in opposite directions.
  const auto& a = r.schedule.waveform({0, 1});
  const auto& b = r.schedule.waveform({1, 1});
  double overlap = 0.0;
  for (int i = 1; i < 200; ++i) overlap += a(i * r.schedule.duration() / 200) * b(i * r.schedule.duration() / 200);
  CHECK(overlap < 0.0);
}

TEST_CASE("negative Phi_11 is also reachable") {
  DesignProblem p = fixtures::phi11_problem();
  p.two_qutrit = {{1, 1, -2.0 * kPi / 3.0}};
  const DesignReport r = design(p);
  CHECK(r.success);
  CHECK(phase_of(r, "Phi_11") == doctest::Approx(-2.0 * kPi / 3.0).epsilon(1e-9));
}

TEST_CASE("two simultaneous targets") {
  const DesignReport r = design(two_targets());
  CHECK(r.success);
  CHECK(r.closure_max < kDesignClosureGoal);
  CHECK(r.max_phase_error() < kDesignPhaseGoal);
  CHECK(phase_of(r, "Phi_11") == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-9));
  CHECK(phase_of(r, "Phi_22") == doctest::Approx(kPi / 2.0).epsilon(1e-9));
  CHECK(r.evaluations <= 10000);
}

TEST_CASE("reported numbers match an independent recomputation") {
  const DesignProblem p = two_targets();
  const DesignReport r = design(p);
  const CouplingTable t = coupling_table(r.schedule, p.modes);
  CHECK(std::abs(r.closure_max - closure_residuals(t, p.duration).max_abs) <= 1e-12);
  const GaugePhases g = two_qutrit_phases(t, p.duration);
  for (const PhaseTarget& target : p.two_qutrit) {
    const std::string label = "Phi_" + std::to_string(target.m) + std::to_string(target.n);
    CHECK(std::abs(phase_of(r, label) - g.phi_two(target.m, target.n)) <= 1e-12);
  }
  for (const auto& e : r.phase_errors) CHECK(e.error == std::abs(e.achieved - e.target));
}

TEST_CASE("same problem and seed give the same report") {
  const DesignReport a = design(two_targets()), b = design(two_targets());
  for (const Slot& s : two_targets().driven) CHECK(a.schedule.waveform(s).coefficients() == b.schedule.waveform(s).coefficients());
  CHECK(a.objective_history == b.objective_history);
  CHECK(a.closure_max == b.closure_max);
  CHECK(a.evaluations == b.evaluations);
  CHECK(a.seed == b.seed);
}

TEST_CASE("too few terms is reported as infeasible") {
  DesignProblem p = fixtures::phi11_problem();
  CHECK(p.min_terms() == 5);
  p.n_terms = 4;
  const DesignReport r = design(p);
  CHECK(r.infeasible);
  CHECK_FALSE(r.success);
  CHECK(r.message.find("infeasible") != std::string::npos);
  p.n_terms = 5;
  CHECK(design(p).success);
}

TEST_CASE("feasibility scan") {
  const DesignProblem base = fixtures::phi11_problem();
  const std::vector<double> durations{20.0 * kPi, 40.0 * kPi, 80.0 * kPi};
  const std::vector<int> terms{3, 4, 5, 6, 8};
  const auto cells = feasibility_scan(base, durations, terms);
  REQUIRE(cells.size() == durations.size() * terms.size());
  for (std::size_t i = 0; i < durations.size(); ++i) {
    bool seen_success = false;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const ScanCell& c = cells[i * terms.size() + j];
      CHECK(c.duration == durations[i]);
      CHECK(c.n_terms == terms[j]);
      if (terms[j] < base.min_terms()) {
        CHECK(c.infeasible);
        CHECK_FALSE(c.success);
      }
      // Success never disappears when terms are added.
      if (seen_success) CHECK(c.success);
      seen_success = seen_success || c.success;
    }
    CHECK(seen_success);
  }
  // Longer windows need less force for the same phase.
  for (std::size_t j = 0; j < terms.size(); ++j)
    for (std::size_t i = 1; i < durations.size(); ++i) {
      const ScanCell& shorter = cells[(i - 1) * terms.size() + j];
      const ScanCell& longer = cells[i * terms.size() + j];
      if (shorter.success && longer.success) CHECK(longer.max_force < shorter.max_force);
    }

  const auto again = feasibility_scan(base, durations, terms);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(again[i].success == cells[i].success);
    CHECK(again[i].closure_max == cells[i].closure_max);
    CHECK(again[i].max_force == cells[i].max_force);
  }
}

TEST_CASE("commensurate window drops a closure constraint") {
  // With w T = 10 pi the sine part of the overlap only sees the j = 10 term.
  DesignProblem p = toy(-0.3);
  p.duration = 10.0 * kPi;
  const DesignReport r = design(p);
  CHECK(r.success);
  CHECK(r.null_space_dim == 5);
}

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

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "qutrit/io.hpp"

using namespace qutrit;

namespace {

template <class T>
T round_trip(const T& value) {
  return json::parse(json(value).dump()).get<T>();
}

bool same_waveform(const Waveform& a, const Waveform& b) {
  if (a.kind() != b.kind() || a.duration() != b.duration()) return false;
  for (int i = 0; i <= 50; ++i) {
    const double t = a.duration() * i / 50.0;
    if (a(t) != b(t)) return false;
  }
  return true;
}

std::string temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << contents;
  return path.string();
}

}  // namespace

TEST_CASE("complex matrices use [re, im] pairs") {
  Eigen::MatrixXcd m(2, 3);
  m << Complex(1, 2), Complex(-0.5, 0), Complex(0, 3), Complex(4, -4), Complex(1e-300, 5e300), Complex(0, 0);
  const json j = matrix_to_json(m);
  CHECK(j[0][1] == json::array({-0.5, 0.0}));
  CHECK(complex_matrix_from_json(json::parse(j.dump())) == m);
  Eigen::MatrixXd r(2, 2);
  r << 0.1, 0.2, 0.3, 0.4;
  CHECK(real_matrix_from_json(matrix_to_json(r)) == r);
  CHECK_THROWS_AS(complex_from_json(json::array({1.0})), InputError);
  CHECK_THROWS_AS(real_matrix_from_json(json::parse("[[1, 2], [3]]")), InputError);
}

TEST_CASE("trap and modes round-trip") {
  TrapSpec t;
  t.n_ions = 3;
  t.omega = 2.5;
  t.delta1 = 0.7;
  t.delta2 = 1.9;
  const TrapSpec u = round_trip(t);
  CHECK(u.n_ions == 3);
  CHECK(u.omega == 2.5);
  CHECK(u.delta1 == 0.7);
  CHECK(u.delta2 == 1.9);
  const ModeData m = normal_modes(t);
  const ModeData n = round_trip(m);
  CHECK(n.frequencies == m.frequencies);
  CHECK(n.mode_matrix == m.mode_matrix);
  CHECK(n.equilibrium == m.equilibrium);
}

TEST_CASE("trap without omega is rejected") {
  CHECK_THROWS_AS(json::parse(R"({"n_ions": 2})").get<TrapSpec>(), InputError);
  CHECK_THROWS_AS(json::parse(R"({"n_ions": "two", "omega": 1})").get<TrapSpec>(), InputError);
}

TEST_CASE("waveforms and schedules round-trip") {
  const double T = 12.0;
  PulseSchedule s(fixtures::two_ions(), T);
  s.set({0, 1}, Waveform::fourier_sine(T, {0.1, -0.2, 0.3}));
  s.set({1, 0}, Waveform::enveloped_carrier(T, 0.4, 1.3, 0.2));
  s.set({1, 2}, Waveform::piecewise_constant({0.0, 4.0, T}, {0.5, -0.5}));
  const PulseSchedule r = round_trip(s);
  CHECK(r.duration() == T);
  CHECK(r.trap().n_ions == 2);
  CHECK(r.driven() == s.driven());
  for (int ion = 0; ion < 2; ++ion)
    for (int level = 0; level < 3; ++level) CHECK(same_waveform(r.waveform({ion, level}), s.waveform({ion, level})));
  CHECK_THROWS_AS(json::parse(R"({"kind": "square", "duration": 1})").get<Waveform>(), InputError);
  CHECK_THROWS_AS(json::parse(R"({"kind": "fourier_sine", "duration": 1})").get<Waveform>(), InputError);
}

TEST_CASE("phases, residuals and stats round-trip") {
  GaugePhases p;
  p.phi_two << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  p.phi_single << -1, -2, -3, 0.5, 0.25, 0.125;
  p.duration = 3.5;
  const GaugePhases q = round_trip(p);
  CHECK(q.phi_two == p.phi_two);
  CHECK(q.phi_single == p.phi_single);
  CHECK(q.duration == 3.5);

  PulseSchedule s(fixtures::two_ions(), 7.0);
  s.set({0, 2}, Waveform::fourier_sine(7.0, {0.3, 0.1}));
  const ClosureResidual a = closure_residuals(coupling_table(s, normal_modes(fixtures::two_ions())), 7.0);
  const ClosureResidual b = round_trip(a);
  CHECK(b.alpha == a.alpha);
  CHECK(b.max_abs == a.max_abs);
  CHECK(json(a)["alpha"][0][2][1].size() == 2);

  PropagationStats st{12, 3, 0.01, 2e-9};
  const PropagationStats st2 = round_trip(st);
  CHECK(st2.accepted_steps == 12);
  CHECK(st2.rejected_steps == 3);
  CHECK(st2.leakage == 2e-9);
}

TEST_CASE("simulation results round-trip with and without fidelity") {
  SimResult r;
  r.effective_unitary = evolution_from_phases(GaugePhases{});
  r.effective_unitary(4, 4) = std::polar(1.0, 0.3);
  r.residual_entanglement = 1e-7;
  r.cutoff = 16;
  r.motional_prep = {2, 1};
  const SimResult a = round_trip(r);
  CHECK(a.effective_unitary == r.effective_unitary);
  CHECK_FALSE(a.fidelity.has_value());
  CHECK(json(r)["fidelity"].is_null());
  r.fidelity = 0.999;
  CHECK(round_trip(r).fidelity == 0.999);
  CHECK(a.motional_prep == r.motional_prep);
}

TEST_CASE("design problems read from JSON") {
  const DesignProblem p = json::parse(R"({
    "trap": {"n_ions": 2, "omega": 1.0},
    "duration": 125.66370614359172,
    "driven": [[0, 1], [1, 1]],
    "n_terms": 8,
    "targets": {"two_qutrit": [{"m": 1, "n": 1, "value": 2.0943951023931953}]}
  })").get<DesignProblem>();
  CHECK(p.modes.size() == 2);
  CHECK(p.driven.size() == 2);
  CHECK(p.two_qutrit.size() == 1);
  CHECK_FALSE(p.single.has_value());
  const DesignProblem q = round_trip(p);
  CHECK(q.duration == p.duration);
  CHECK(q.two_qutrit[0].value == p.two_qutrit[0].value);
  CHECK(q.seed == p.seed);

  const DesignProblem s = json::parse(R"({
    "trap": {"n_ions": 1, "omega": 1.0}, "duration": 33.0, "driven": [[0, 1]], "n_terms": 6,
    "targets": {"single": {"slot": [0, 1], "value": -0.3}}
  })").get<DesignProblem>();
  REQUIRE(s.single.has_value());
  CHECK(s.single->slot == Slot{0, 1});
  CHECK(round_trip(s).single->value == -0.3);
  CHECK_THROWS_AS(json::parse(R"({"trap": {"n_ions": 2, "omega": 1}, "duration": 1})").get<DesignProblem>(),
                  InputError);
}

TEST_CASE("design reports and transcripts round-trip") {
  const DesignReport& r = fixtures::phi11_design();
  const DesignReport a = round_trip(r);
  CHECK(a.success == r.success);
  CHECK(a.closure_max == r.closure_max);
  CHECK(a.method == r.method);
  CHECK(a.objective_history == r.objective_history);
  REQUIRE(a.phase_errors.size() == r.phase_errors.size());
  CHECK(a.phase_errors[0].label == r.phase_errors[0].label);
  CHECK(a.schedule.waveform({0, 1}).coefficients() == r.schedule.waveform({0, 1}).coefficients());

  const ScanCell c{6.0, 5, true, false, 1e-12, 2e-9, 0.4};
  const ScanCell d = round_trip(c);
  CHECK(d.n_terms == 5);
  CHECK(d.max_force == 0.4);

  const EntangleTranscript t = entangle_demo();
  const json tj = t;
  CHECK(tj["order"] == (t.right_to_left ? "right_to_left" : "left_to_right"));
  const EntangleTranscript u = round_trip(t);
  REQUIRE(u.stages.size() == t.stages.size());
  CHECK(u.stages[2].state == t.stages[2].state);
  CHECK(u.final_fidelity == t.final_fidelity);
  CHECK(u.local_qutrit == t.local_qutrit);
}

TEST_CASE("manifest and digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const std::string path = temp_file("qutrit_io_abc.txt", "abc");
  CHECK(sha256_file(path) == sha256_hex("abc"));
  CHECK_THROWS_AS(sha256_file(path + ".missing"), InputError);

  RunManifest m;
  m.command = "design";
  m.inputs = {{path, sha256_hex("abc")}};
  m.seed = 42;
  m.wall_clock_seconds = 0.5;
  const json j = m;
  CHECK(j["version"] == "0.1.0");
  const RunManifest n = round_trip(m);
  CHECK(n.inputs[0].sha256 == m.inputs[0].sha256);
  CHECK(n.seed == 42);
}

TEST_CASE("seed override from the environment") {
  unsetenv("QUTRIT_SEED");
  CHECK(resolve_seed(7) == 7);
  setenv("QUTRIT_SEED", "123", 1);
  CHECK(resolve_seed(7) == 123);
  setenv("QUTRIT_SEED", "12x", 1);
  CHECK_THROWS_AS(resolve_seed(7), InputError);
  setenv("QUTRIT_SEED", "-3", 1);
  CHECK_THROWS_AS(resolve_seed(7), InputError);
  unsetenv("QUTRIT_SEED");
}

TEST_CASE("unreadable or malformed files are input errors") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/qutrit.json"), InputError);
  CHECK_THROWS_AS(read_json_file(temp_file("qutrit_io_bad.json", "{\"omega\": ")), InputError);
  CHECK(read_json_file(temp_file("qutrit_io_ok.json", "{\"omega\": 2}"))["omega"] == 2);
}

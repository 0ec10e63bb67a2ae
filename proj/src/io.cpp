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

#include "qutrit/io.hpp"

#include <fstream>
#include <sstream>

namespace qutrit {

namespace {

template <class T>
T field(const json& j, const char* key) {
  require(j.is_object(), std::string("expected a JSON object holding '") + key + "'");
  const auto it = j.find(key);
  require(it != j.end(), std::string("missing field '") + key + "'");
  try {
    return it->template get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json slot_to_json(Slot s) { return json::array({s.ion, s.level}); }

Slot slot_from_json(const json& j) {
  require(j.is_array() && j.size() == 2, "slot must be [ion, level]");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          "complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXd real_matrix_from_json(const json& j) {
  require(j.is_array(), "matrix must be an array of rows");
  if (j.empty()) return {};
  const auto cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    require(j[r].is_array() && j[r].size() == cols, "matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXcd complex_matrix_from_json(const json& j) {
  require(j.is_array(), "matrix must be an array of rows");
  if (j.empty()) return {};
  const auto cols = j[0].size();
  Eigen::MatrixXcd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    require(j[r].is_array() && j[r].size() == cols, "matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

// ------------------------------------------------------------------ trap

void to_json(json& j, const TrapSpec& t) {
  j = {{"n_ions", t.n_ions}, {"omega", t.omega}, {"mass", t.mass}, {"delta1", t.delta1}, {"delta2", t.delta2}};
}

void from_json(const json& j, TrapSpec& t) {
  t.n_ions = field<int>(j, "n_ions");
  t.omega = field<double>(j, "omega");
  t.mass = field_or<double>(j, "mass", 1.0);
  t.delta1 = field_or<double>(j, "delta1", 0.0);
  t.delta2 = field_or<double>(j, "delta2", 0.0);
  t.validate();
}

void to_json(json& j, const ModeData& m) {
  j = {{"frequencies", vector_to_json(m.frequencies)},
       {"mode_matrix", matrix_to_json(m.mode_matrix)},
       {"equilibrium", vector_to_json(m.equilibrium)},
       {"mass", m.mass}};
}

void from_json(const json& j, ModeData& m) {
  m.frequencies = vector_from_json(field<json>(j, "frequencies"));
  m.mode_matrix = real_matrix_from_json(field<json>(j, "mode_matrix"));
  m.equilibrium = vector_from_json(field<json>(j, "equilibrium"));
  m.mass = field<double>(j, "mass");
  require(m.mode_matrix.cols() == m.frequencies.size() && m.mode_matrix.rows() == m.equilibrium.size(),
          "mode data: inconsistent dimensions");
}

// ---------------------------------------------------------------- pulses

void to_json(json& j, const Waveform& w) {
  j = {{"kind", to_string(w.kind())}, {"duration", w.duration()}};
  switch (w.kind()) {
    case WaveformKind::zero: break;
    case WaveformKind::piecewise_constant:
      j["breakpoints"] = w.breakpoints();
      j["values"] = w.values();
      break;
    case WaveformKind::fourier_sine: j["coefficients"] = w.coefficients(); break;
    case WaveformKind::enveloped_carrier:
      j["amplitude"] = w.amplitude();
      j["carrier_frequency"] = w.carrier_frequency();
      j["phase"] = w.phase();
      break;
  }
}

void from_json(const json& j, Waveform& w) {
  switch (waveform_kind_from_string(field<std::string>(j, "kind"))) {
    case WaveformKind::zero: w = Waveform::zero(field<double>(j, "duration")); break;
    case WaveformKind::piecewise_constant:
      w = Waveform::piecewise_constant(field<std::vector<double>>(j, "breakpoints"),
                                       field<std::vector<double>>(j, "values"));
      break;
    case WaveformKind::fourier_sine:
      w = Waveform::fourier_sine(field<double>(j, "duration"), field<std::vector<double>>(j, "coefficients"));
      break;
    case WaveformKind::enveloped_carrier:
      w = Waveform::enveloped_carrier(field<double>(j, "duration"), field<double>(j, "amplitude"),
                                      field_or<double>(j, "carrier_frequency", 0.0), field_or<double>(j, "phase", 0.0));
      break;
  }
}

void to_json(json& j, const PulseSchedule& s) {
  json entries = json::array();
  for (const auto& [slot, w] : s.entries()) entries.push_back({{"ion", slot.ion}, {"level", slot.level}, {"waveform", w}});
  j = {{"trap", s.trap()}, {"duration", s.duration()}, {"entries", entries}};
}

void from_json(const json& j, PulseSchedule& s) {
  s = PulseSchedule(field<TrapSpec>(j, "trap"), field<double>(j, "duration"));
  for (const auto& e : field_or<json>(j, "entries", json::array()))
    s.set({field<int>(e, "ion"), field<int>(e, "level")}, field<Waveform>(e, "waveform"));
}

void to_json(json& j, const ClosureResidual& r) {
  json ions = json::array();
  for (int mu = 0; mu < r.n_ions; ++mu) {
    json levels = json::array();
    for (int m = 0; m < kLevels; ++m) {
      json modes = json::array();
      for (int k = 0; k < r.n_modes; ++k) modes.push_back(complex_to_json(r.at(mu, m, k)));
      levels.push_back(modes);
    }
    ions.push_back(levels);
  }
  j = {{"n_ions", r.n_ions}, {"n_modes", r.n_modes}, {"alpha", ions}, {"max_abs", r.max_abs},
       {"error_estimate", r.error_estimate}};
}

void from_json(const json& j, ClosureResidual& r) {
  r.n_ions = field<int>(j, "n_ions");
  r.n_modes = field<int>(j, "n_modes");
  r.alpha.assign(static_cast<std::size_t>(r.n_ions) * kLevels * r.n_modes, Complex());
  const json& a = field<json>(j, "alpha");
  require(a.is_array() && static_cast<int>(a.size()) == r.n_ions, "closure: alpha has the wrong shape");
  for (int mu = 0; mu < r.n_ions; ++mu) {
    require(a[mu].size() == kLevels, "closure: alpha has the wrong shape");
    for (int m = 0; m < kLevels; ++m) {
      require(static_cast<int>(a[mu][m].size()) == r.n_modes, "closure: alpha has the wrong shape");
      for (int k = 0; k < r.n_modes; ++k) r.at(mu, m, k) = complex_from_json(a[mu][m][k]);
    }
  }
  r.max_abs = field<double>(j, "max_abs");
  r.error_estimate = field<double>(j, "error_estimate");
}

// ----------------------------------------------------------------- phases

void to_json(json& j, const GaugePhases& p) {
  j = {{"phi_two", matrix_to_json(Eigen::MatrixXd(p.phi_two))},
       {"phi_single", matrix_to_json(Eigen::MatrixXd(p.phi_single))},
       {"duration", p.duration},
       {"error_estimate", p.error_estimate}};
}

void from_json(const json& j, GaugePhases& p) {
  const Eigen::MatrixXd two = real_matrix_from_json(field<json>(j, "phi_two"));
  const Eigen::MatrixXd single = real_matrix_from_json(field<json>(j, "phi_single"));
  require(two.rows() == 3 && two.cols() == 3, "phases: phi_two must be 3x3");
  require(single.rows() == 2 && single.cols() == 3, "phases: phi_single must be 2x3");
  p.phi_two = two;
  p.phi_single = single;
  p.duration = field<double>(j, "duration");
  p.error_estimate = field<double>(j, "error_estimate");
}

// ----------------------------------------------------------------- oracle

void to_json(json& j, const PropagationStats& s) {
  j = {{"accepted_steps", s.accepted_steps}, {"rejected_steps", s.rejected_steps}, {"min_step", s.min_step},
       {"leakage", s.leakage}};
}

void from_json(const json& j, PropagationStats& s) {
  s.accepted_steps = field<long>(j, "accepted_steps");
  s.rejected_steps = field<long>(j, "rejected_steps");
  s.min_step = field<double>(j, "min_step");
  s.leakage = field<double>(j, "leakage");
}

void to_json(json& j, const SimResult& r) {
  j = {{"effective_unitary", matrix_to_json(Eigen::MatrixXcd(r.effective_unitary))},
       {"residual_entanglement", r.residual_entanglement},
       {"leakage", r.leakage},
       {"fidelity", r.fidelity ? json(*r.fidelity) : json(nullptr)},
       {"cutoff", r.cutoff},
       {"motional_prep", r.motional_prep},
       {"trusted", r.trusted},
       {"stats", r.stats}};
}

void from_json(const json& j, SimResult& r) {
  const Eigen::MatrixXcd u = complex_matrix_from_json(field<json>(j, "effective_unitary"));
  require(u.rows() == 9 && u.cols() == 9, "sim result: effective_unitary must be 9x9");
  r.effective_unitary = u;
  r.residual_entanglement = field<double>(j, "residual_entanglement");
  r.leakage = field<double>(j, "leakage");
  const json& f = field<json>(j, "fidelity");
  r.fidelity = f.is_null() ? std::nullopt : std::optional<double>(f.get<double>());
  r.cutoff = field<int>(j, "cutoff");
  r.motional_prep = field<std::vector<int>>(j, "motional_prep");
  r.trusted = field<bool>(j, "trusted");
  r.stats = field<PropagationStats>(j, "stats");
}

// --------------------------------------------------------------- designer

void to_json(json& j, const DesignProblem& p) {
  json driven = json::array();
  for (const Slot& s : p.driven) driven.push_back(slot_to_json(s));
  json targets;
  if (p.single) {
    targets["single"] = {{"slot", slot_to_json(p.single->slot)}, {"value", p.single->value}};
  } else {
    json list = json::array();
    for (const auto& t : p.two_qutrit) list.push_back({{"m", t.m}, {"n", t.n}, {"value", t.value}});
    targets["two_qutrit"] = list;
  }
  j = {{"trap", p.trap},       {"modes", p.modes},     {"duration", p.duration},
       {"driven", driven},     {"n_terms", p.n_terms}, {"targets", targets},
       {"weight", p.weight},   {"seed", p.seed},       {"max_evaluations", p.max_evaluations}};
}

void from_json(const json& j, DesignProblem& p) {
  p.trap = field<TrapSpec>(j, "trap");
  p.modes = j.contains("modes") ? field<ModeData>(j, "modes") : normal_modes(p.trap);
  p.duration = field<double>(j, "duration");
  p.driven.clear();
  for (const auto& s : field<json>(j, "driven")) p.driven.push_back(slot_from_json(s));
  p.n_terms = field<int>(j, "n_terms");
  const json& targets = field<json>(j, "targets");
  p.two_qutrit.clear();
  p.single.reset();
  if (targets.contains("single")) {
    const json& s = targets["single"];
    p.single = SingleTarget{slot_from_json(field<json>(s, "slot")), field<double>(s, "value")};
  }
  for (const auto& t : field_or<json>(targets, "two_qutrit", json::array()))
    p.two_qutrit.push_back({field<int>(t, "m"), field<int>(t, "n"), field<double>(t, "value")});
  p.weight = field_or<double>(j, "weight", 1e6);
  p.seed = field_or<std::uint64_t>(j, "seed", 1);
  p.max_evaluations = field_or<int>(j, "max_evaluations", 10000);
  p.validate();
}

void to_json(json& j, const PhaseError& e) {
  j = {{"label", e.label}, {"target", e.target}, {"achieved", e.achieved}, {"error", e.error}};
}

void from_json(const json& j, PhaseError& e) {
  e.label = field<std::string>(j, "label");
  e.target = field<double>(j, "target");
  e.achieved = field<double>(j, "achieved");
  e.error = field<double>(j, "error");
}

void to_json(json& j, const DesignReport& r) {
  j = {{"schedule", r.schedule},
       {"closure_max", r.closure_max},
       {"phase_errors", r.phase_errors},
       {"objective_history", r.objective_history},
       {"seed", r.seed},
       {"success", r.success},
       {"infeasible", r.infeasible},
       {"method", r.method},
       {"message", r.message},
       {"reachable_signs", r.reachable_signs},
       {"null_space_dim", r.null_space_dim},
       {"condition", r.condition},
       {"evaluations", r.evaluations},
       {"max_force", r.max_force}};
}

void from_json(const json& j, DesignReport& r) {
  r.schedule = field<PulseSchedule>(j, "schedule");
  r.closure_max = field<double>(j, "closure_max");
  r.phase_errors = field<std::vector<PhaseError>>(j, "phase_errors");
  r.objective_history = field<std::vector<double>>(j, "objective_history");
  r.seed = field<std::uint64_t>(j, "seed");
  r.success = field<bool>(j, "success");
  r.infeasible = field<bool>(j, "infeasible");
  r.method = field<std::string>(j, "method");
  r.message = field<std::string>(j, "message");
  r.reachable_signs = field<std::vector<int>>(j, "reachable_signs");
  r.null_space_dim = field<int>(j, "null_space_dim");
  r.condition = field<double>(j, "condition");
  r.evaluations = field<long>(j, "evaluations");
  r.max_force = field<double>(j, "max_force");
}

void to_json(json& j, const ScanCell& c) {
  j = {{"duration", c.duration},         {"n_terms", c.n_terms},
       {"success", c.success},           {"infeasible", c.infeasible},
       {"closure_max", c.closure_max},   {"max_phase_error", c.max_phase_error},
       {"max_force", c.max_force}};
}

void from_json(const json& j, ScanCell& c) {
  c.duration = field<double>(j, "duration");
  c.n_terms = field<int>(j, "n_terms");
  c.success = field<bool>(j, "success");
  c.infeasible = field<bool>(j, "infeasible");
  c.closure_max = field<double>(j, "closure_max");
  c.max_phase_error = field<double>(j, "max_phase_error");
  c.max_force = field<double>(j, "max_force");
}

// ------------------------------------------------------------------- demo

void to_json(json& j, const DemoStage& s) {
  j = {{"name", s.name},
       {"state", matrix_to_json(Eigen::MatrixXcd(s.state.transpose()))[0]},
       {"entropy", s.entropy},
       {"fidelity", s.fidelity}};
}

void from_json(const json& j, DemoStage& s) {
  s.name = field<std::string>(j, "name");
  const json& st = field<json>(j, "state");
  require(st.is_array() && st.size() == 9, "stage state must have nine amplitudes");
  for (int i = 0; i < 9; ++i) s.state[i] = complex_from_json(st[i]);
  s.entropy = field<double>(j, "entropy");
  s.fidelity = field<double>(j, "fidelity");
}

void to_json(json& j, const EntangleTranscript& t) {
  j = {{"stages", t.stages},
       {"primed_basis", matrix_to_json(Eigen::MatrixXcd(t.primed_basis))},
       {"primed_residual", t.primed_residual},
       {"local_qutrit", t.local_qutrit},
       {"order", t.right_to_left ? "right_to_left" : "left_to_right"},
       {"final_fidelity", t.final_fidelity},
       {"success", t.success}};
}

void from_json(const json& j, EntangleTranscript& t) {
  t.stages = field<std::vector<DemoStage>>(j, "stages");
  const Eigen::MatrixXcd b = complex_matrix_from_json(field<json>(j, "primed_basis"));
  require(b.rows() == 3 && b.cols() == 3, "primed_basis must be 3x3");
  t.primed_basis = b;
  t.primed_residual = field<double>(j, "primed_residual");
  t.local_qutrit = field<int>(j, "local_qutrit");
  const auto order = field<std::string>(j, "order");
  require(order == "right_to_left" || order == "left_to_right", "order must be right_to_left or left_to_right");
  t.right_to_left = order == "right_to_left";
  t.final_fidelity = field<double>(j, "final_fidelity");
  t.success = field<bool>(j, "success");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace qutrit

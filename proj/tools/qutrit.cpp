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

// qutrit: command-line front end.
//
//   qutrit modes TRAP.json
//   qutrit phases SCHEDULE.json [--adiabatic] [--compare]
//   qutrit closure SCHEDULE.json
//   qutrit simulate SCHEDULE.json [--cutoff N] [--tol X] [--nbar A,B,..] [--prep N0,N1] [--csv FILE]
//   qutrit design PROBLEM.json [--verify-oracle] [--csv FILE]
//   qutrit demo-entangle
//
// Every command prints {"manifest": ..., "result": ...}. Exit codes:
// 0 success, 1 numerical failure (details in the payload), 2 input error.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>

#include "qutrit/io.hpp"

namespace {

using namespace qutrit;

struct Output {
  std::string path;
  std::string csv;
};

int emit(const Output& out, RunManifest manifest, json result, std::chrono::steady_clock::time_point start,
         int code) {
  manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json doc = {{"manifest", manifest}, {"result", std::move(result)}};
  if (out.path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream f(out.path);
    require(static_cast<bool>(f), "cannot write '" + out.path + "'");
    f << doc.dump(2) << "\n";
  }
  return code;
}

RunManifest manifest_for(const std::string& command, const std::vector<std::string>& inputs, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  for (const auto& p : inputs) m.inputs.push_back({p, sha256_file(p)});
  m.seed = resolve_seed(seed);
  return m;
}

void write_csv(const std::string& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write '" + path + "'");
  f.precision(17);
  f << header << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
    f << "\n";
  }
}

json numerical_failure(const NumericalError& e) {
  return {{"error", "numerical"}, {"message", e.what()}, {"estimate", e.estimate()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qutrit phase gates from state-dependent forces"};
  app.require_subcommand(1);
  Output out;

  std::string input;
  bool adiabatic = false, compare = false, verify_oracle = false, auto_grow = false;
  FockConfig fock;
  std::vector<double> nbars;
  std::vector<int> prep{0, 0};

  auto* modes_cmd = app.add_subcommand("modes", "Equilibrium positions and normal modes of a trap");
  modes_cmd->add_option("trap", input, "Trap JSON")->required();

  auto* phases_cmd = app.add_subcommand("phases", "Gate phases of a pulse schedule");
  phases_cmd->add_option("schedule", input, "Schedule JSON")->required();
  phases_cmd->add_flag("--adiabatic", adiabatic, "Slow-drive approximation instead of the exact phases");
  phases_cmd->add_flag("--compare", compare, "Emit exact and adiabatic phases side by side");

  auto* closure_cmd = app.add_subcommand("closure", "Loop-closure residuals of a pulse schedule");
  closure_cmd->add_option("schedule", input, "Schedule JSON")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Truncated-Fock propagation of a two-ion schedule");
  sim_cmd->add_option("schedule", input, "Schedule JSON")->required();
  sim_cmd->add_option("--cutoff", fock.cutoff, "Fock levels per mode")->check(CLI::Range(4, 4096));
  sim_cmd->add_option("--tol", fock.tol, "Propagation accuracy")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--dt-max", fock.dt_max, "Largest time step")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--nbar", nbars, "Thermal occupations for process fidelity")->delimiter(',');
  sim_cmd->add_option("--prep", prep, "Fock occupation per mode")->delimiter(',');
  sim_cmd->add_flag("--auto-grow", auto_grow, "Double the cutoff while leakage is too high");
  sim_cmd->add_option("--csv", out.csv, "Fidelity versus nbar table");

  auto* design_cmd = app.add_subcommand("design", "Synthesise a closed-loop pulse for target phases");
  design_cmd->add_option("problem", input, "Problem JSON")->required();
  design_cmd->add_flag("--verify-oracle", verify_oracle, "Check the designed pulse with the Fock propagator");
  design_cmd->add_option("--csv", out.csv, "Feasibility scan table");

  auto* demo_cmd = app.add_subcommand("demo-entangle", "Maximally entangled two-qutrit state from phase gates");

  for (auto* cmd : {modes_cmd, phases_cmd, closure_cmd, sim_cmd, design_cmd, demo_cmd})
    cmd->add_option("-o,--output", out.path, "Write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), 2);
  }

  const auto start = std::chrono::steady_clock::now();
  std::string command;
  try {
    if (modes_cmd->parsed()) {
      command = "modes";
      const TrapSpec trap = read_json_file(input).get<TrapSpec>();
      return emit(out, manifest_for(command, {input}, 0), normal_modes(trap), start, 0);
    }

    if (phases_cmd->parsed() || closure_cmd->parsed()) {
      command = phases_cmd->parsed() ? "phases" : "closure";
      const PulseSchedule schedule = read_json_file(input).get<PulseSchedule>();
      const CouplingTable table(schedule, normal_modes(schedule.trap()));
      json result;
      if (command == "closure") {
        result = closure_residuals(table, schedule.duration());
      } else if (compare) {
        const AdiabaticityCheck check = adiabaticity_check(schedule, table.modes());
        result = {{"exact", two_qutrit_phases(table, schedule.duration())},
                  {"adiabatic", adiabatic_phases(table, schedule.duration())},
                  {"adiabaticity_ratio", check.evaluable ? json(check.ratio) : json(nullptr)}};
      } else if (adiabatic) {
        result = adiabatic_phases(table, schedule.duration());
      } else {
        result = two_qutrit_phases(table, schedule.duration());
      }
      return emit(out, manifest_for(command, {input}, 0), result, start, 0);
    }

    if (sim_cmd->parsed()) {
      command = "simulate";
      const PulseSchedule schedule = read_json_file(input).get<PulseSchedule>();
      const ModeData modes = normal_modes(schedule.trap());
      fock.auto_grow = auto_grow;
      fock.validate();
      const RunManifest manifest = manifest_for(command, {input}, 0);
      try {
        SimResult sim = effective_internal_unitary(schedule, modes, fock, prep);
        json thermal = json::array();
        std::vector<std::vector<double>> rows;
        if (!nbars.empty()) {
          const TwoQutritGate<double> target =
              evolution_from_phases(two_qutrit_phases(coupling_table(schedule, modes), schedule.duration()));
          for (double nbar : nbars) {
            const double f = process_fidelity_thermal(schedule, modes, fock, target, {nbar});
            if (!sim.fidelity) sim.fidelity = f;
            thermal.push_back({{"nbar", nbar}, {"fidelity", f}});
            rows.push_back({nbar, f});
          }
          if (!out.csv.empty()) write_csv(out.csv, "nbar,fidelity", rows);
        }
        json result = sim;
        result["thermal"] = thermal;
        return emit(out, manifest, result, start, sim.trusted ? 0 : 1);
      } catch (const NumericalError& e) {
        return emit(out, manifest, numerical_failure(e), start, 1);
      }
    }

    if (design_cmd->parsed()) {
      command = "design";
      const json doc = read_json_file(input);
      DesignProblem problem = doc.get<DesignProblem>();
      problem.seed = resolve_seed(problem.seed);
      const RunManifest manifest = manifest_for(command, {input}, problem.seed);
      try {
        const DesignReport report = design(problem);
        json result = report;
        if (verify_oracle && report.success) {
          const TwoQutritGate<double> target = evolution_from_phases(
              two_qutrit_phases(coupling_table(report.schedule, problem.modes), problem.duration));
          const std::vector<int> vacuum(problem.modes.size(), 0);
          const SimResult sim = effective_internal_unitary(report.schedule, problem.modes, FockConfig{}, vacuum);
          const double fid = process_fidelity_thermal(report.schedule, problem.modes, FockConfig{}, target, {0.0});
          result["oracle"] = {{"fidelity", fid},
                              {"unitary_error", (sim.effective_unitary - align_global_phase(target)).cwiseAbs().maxCoeff()},
                              {"residual_entanglement", sim.residual_entanglement},
                              {"leakage", sim.leakage}};
        }
        if (doc.contains("scan")) {
          const json& scan = doc["scan"];
          const auto cells = feasibility_scan(problem, scan.at("durations").get<std::vector<double>>(),
                                              scan.at("n_terms").get<std::vector<int>>());
          result["scan"] = cells;
          if (!out.csv.empty()) {
            std::vector<std::vector<double>> rows;
            for (const auto& c : cells)
              rows.push_back({c.duration, double(c.n_terms), double(c.success), double(c.infeasible), c.closure_max,
                              c.max_phase_error, c.max_force});
            write_csv(out.csv, "duration,n_terms,success,infeasible,closure_max,max_phase_error,max_force", rows);
          }
        }
        return emit(out, manifest, result, start, report.success ? 0 : 1);
      } catch (const NumericalError& e) {
        return emit(out, manifest, numerical_failure(e), start, 1);
      }
    }

    if (demo_cmd->parsed()) {
      command = "demo-entangle";
      const EntangleTranscript tr = entangle_demo();
      return emit(out, manifest_for(command, {}, 0), tr, start, tr.success ? 0 : 1);
    }
  } catch (const InputError& e) {
    std::cerr << "qutrit " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "qutrit " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "qutrit " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 2;
}

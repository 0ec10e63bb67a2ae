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

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "qutrit/fock_oracle.hpp"
#include "qutrit/gauge_engine.hpp"
#include "qutrit/pulse_designer.hpp"
#include "qutrit/pulses.hpp"
#include "qutrit/qutrit_algebra.hpp"
#include "qutrit/trap_modes.hpp"

namespace qutrit {

using json = nlohmann::json;

/// File-format version written into every manifest.
inline constexpr const char* kToolVersion = "0.1.0";

// Matrices are row-major nested arrays; complex entries are [re, im] pairs.
json complex_to_json(Complex z);
Complex complex_from_json(const json& j);
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd real_matrix_from_json(const json& j);
json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd complex_matrix_from_json(const json& j);

// Readers throw InputError on missing or mistyped fields.
void to_json(json& j, const TrapSpec& t);
void from_json(const json& j, TrapSpec& t);
void to_json(json& j, const ModeData& m);
void from_json(const json& j, ModeData& m);
void to_json(json& j, const Waveform& w);
void from_json(const json& j, Waveform& w);
void to_json(json& j, const PulseSchedule& s);
void from_json(const json& j, PulseSchedule& s);
void to_json(json& j, const GaugePhases& p);
void from_json(const json& j, GaugePhases& p);
void to_json(json& j, const ClosureResidual& r);
void from_json(const json& j, ClosureResidual& r);
void to_json(json& j, const PropagationStats& s);
void from_json(const json& j, PropagationStats& s);
void to_json(json& j, const SimResult& r);
void from_json(const json& j, SimResult& r);
void to_json(json& j, const DesignProblem& p);
void from_json(const json& j, DesignProblem& p);
void to_json(json& j, const PhaseError& e);
void from_json(const json& j, PhaseError& e);
void to_json(json& j, const DesignReport& r);
void from_json(const json& j, DesignReport& r);
void to_json(json& j, const ScanCell& c);
void from_json(const json& j, ScanCell& c);
void to_json(json& j, const DemoStage& s);
void from_json(const json& j, DemoStage& s);
void to_json(json& j, const EntangleTranscript& t);
void from_json(const json& j, EntangleTranscript& t);

/// Reads and parses a JSON file; InputError on I/O or syntax errors.
json read_json_file(const std::string& path);

struct InputDigest {
  std::string path;
  std::string sha256;
};

/// Run record embedded in every CLI output.
struct RunManifest {
  std::string command;
  std::vector<InputDigest> inputs;
  std::string version = kToolVersion;
  std::uint64_t seed = 0;
  double wall_clock_seconds = 0.0;
};

void to_json(json& j, const RunManifest& m);
void from_json(const json& j, RunManifest& m);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

/// `fallback` unless QUTRIT_SEED holds an unsigned integer.
std::uint64_t resolve_seed(std::uint64_t fallback);

}  // namespace qutrit

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

#include "qutrit/common.hpp"

namespace qutrit {

/// Linear Paul trap holding a 1-D chain of qutrit ions.
///
/// Positions are measured in units of the Coulomb length
/// l = (e^2 / (4 pi eps0 M omega^2))^(1/3), which is 1 in code units.
struct TrapSpec {
  int n_ions = 1;
  double omega = 1.0;   // centre-of-mass angular frequency
  double mass = 1.0;
  double delta1 = 0.0;  // |0> <-> |1> splitting
  double delta2 = 0.0;  // |1> <-> |2> splitting

  void validate() const;
};

/// Axial normal modes. Column k of mode_matrix is mode k; row mu is ion mu.
/// Frequencies ascend, so column 0 is the centre-of-mass mode.
struct ModeData {
  Eigen::VectorXd frequencies;
  Eigen::MatrixXd mode_matrix;
  Eigen::VectorXd equilibrium;
  double mass = 1.0;

  int size() const { return static_cast<int>(frequencies.size()); }
};

/// Newton iteration budget for equilibrium_positions.
inline constexpr int kEquilibriumMaxIterations = 200;

/// Force-balance residual u_i - sum_{j<i} 1/(u_i-u_j)^2 + sum_{j>i} 1/(u_j-u_i)^2
/// for ascending positions.
Eigen::VectorXd force_balance_residual(const Eigen::VectorXd& positions);

/// Hessian of the dimensionless potential sum u_i^2/2 + sum_{i<j} 1/|u_i-u_j|.
Eigen::MatrixXd chain_hessian(const Eigen::VectorXd& positions);

/// Ascending dimensionless equilibrium positions. Throws NumericalError with
/// the final residual if the damped Newton iteration does not converge.
Eigen::VectorXd equilibrium_positions(const TrapSpec& trap);

/// Collective axial modes. Each column of the mode matrix has its first
/// non-negligible entry positive.
ModeData normal_modes(const TrapSpec& trap);

}  // namespace qutrit

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

#include "qutrit/trap_modes.hpp"

#include <cmath>
#include <string>

namespace qutrit {

void TrapSpec::validate() const {
  require(n_ions >= 1, "trap: n_ions must be >= 1");
  require(std::isfinite(omega) && omega > 0.0, "trap: omega must be > 0");
  require(std::isfinite(mass) && mass > 0.0, "trap: mass must be > 0");
  require(std::isfinite(delta1) && std::isfinite(delta2), "trap: level splittings must be finite");
}

Eigen::VectorXd force_balance_residual(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  Eigen::VectorXd r = u;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = u[i] - u[j];
      // Repulsion pushes ion i away from ion j.
      r[i] -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
  }
  return r;
}

Eigen::MatrixXd chain_hessian(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = 2.0 / std::pow(std::abs(u[i] - u[j]), 3);
      h(i, i) += c;
      h(i, j) -= c;
    }
  }
  return h;
}

namespace {

bool strictly_ascending(const Eigen::VectorXd& u) {
  for (Eigen::Index i = 1; i < u.size(); ++i)
    if (!(u[i] > u[i - 1])) return false;
  return true;
}

}  // namespace

Eigen::VectorXd equilibrium_positions(const TrapSpec& trap) {
  trap.validate();
  const int n = trap.n_ions;
  if (n == 1) return Eigen::VectorXd::Zero(1);

  // Uniform-spacing seed; the empirical spacing law 2.018 / N^0.559 is
  // close enough that Newton converges from it without damping in practice.
  const double spacing = 2.018 / std::pow(static_cast<double>(n), 0.559);
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u[i] = (i - 0.5 * (n - 1)) * spacing;

  Eigen::VectorXd r = force_balance_residual(u);
  double rnorm = r.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < kEquilibriumMaxIterations && rnorm >= 1e-13; ++iter) {
    const Eigen::VectorXd step = chain_hessian(u).ldlt().solve(-r);
    double lambda = 1.0;
    for (int k = 0; k < 40; ++k, lambda *= 0.5) {
      const Eigen::VectorXd trial = u + lambda * step;
      if (!strictly_ascending(trial)) continue;
      const Eigen::VectorXd rt = force_balance_residual(trial);
      const double tn = rt.cwiseAbs().maxCoeff();
      if (tn < rnorm || k == 39) {
        u = trial;
        r = rt;
        rnorm = tn;
        break;
      }
    }
  }
  if (!(rnorm < 1e-12))
    throw NumericalError("equilibrium_positions: Newton iteration did not converge", rnorm);

  // Symmetric about the centre; remove the O(eps) asymmetry left by rounding.
  Eigen::VectorXd sym = 0.5 * (u - u.reverse());
  if (force_balance_residual(sym).cwiseAbs().maxCoeff() <= rnorm) u = sym;
  return u;
}

ModeData normal_modes(const TrapSpec& trap) {
  trap.validate();
  ModeData out;
  out.mass = trap.mass;
  out.equilibrium = equilibrium_positions(trap);
  const int n = trap.n_ions;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(chain_hessian(out.equilibrium));
  if (eig.info() != Eigen::Success)
    throw NumericalError("normal_modes: Hessian eigen-solve failed", 0.0);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  for (int k = 0; k < n; ++k) {
    if (!(lambda[k] > 1e-12))
      throw NumericalError("normal_modes: non-positive Hessian eigenvalue", lambda[k]);
    if (k > 0 && lambda[k] - lambda[k - 1] < 1e-9 * lambda[k])
      throw NumericalError("normal_modes: degenerate Hessian eigenvalues", lambda[k] - lambda[k - 1]);
  }

  out.frequencies = trap.omega * lambda.cwiseSqrt();
  out.mode_matrix = eig.eigenvectors();
  for (int k = 0; k < n; ++k) {
    auto col = out.mode_matrix.col(k);
    for (int mu = 0; mu < n; ++mu) {
      if (std::abs(col[mu]) > 1e-10) {
        if (col[mu] < 0) col = -col;
        break;
      }
    }
  }
  return out;
}

}  // namespace qutrit

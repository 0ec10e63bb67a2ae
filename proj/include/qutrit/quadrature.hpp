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
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qutrit/common.hpp"

namespace qutrit {

/// n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  explicit GaussLegendreRule(int n);
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Shared 16-point rule used by every composite quadrature in the library.
const GaussLegendreRule& default_rule();

/// Panel edges for composite quadrature on [a, b].
///
/// The interval is split at every breakpoint strictly inside (a, b); each
/// segment is then cut so that the rule sees at least 20 nodes per period of
/// max_frequency, and finally every panel is bisected `refinement` times.
std::vector<double> panel_edges(double a, double b, std::span<const double> breakpoints,
                                double max_frequency, int refinement,
                                const GaussLegendreRule& rule = default_rule());

namespace detail {
inline double max_abs(double v) { return std::abs(v); }
inline double max_abs(const std::complex<double>& v) { return std::abs(v); }
template <class Derived>
double max_abs(const Eigen::DenseBase<Derived>& v) {
  return v.size() == 0 ? 0.0 : v.derived().cwiseAbs().maxCoeff();
}
}  // namespace detail

/// Composite rule over fixed panels. f maps double -> V, where V is a scalar
/// or an Eigen dense object.
template <class F>
auto integrate_on_panels(const F& f, const std::vector<double>& edges,
                         const GaussLegendreRule& rule = default_rule()) {
  using V = std::decay_t<decltype(f(0.0))>;
  V total = f(edges.front()) * 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    for (int i = 0; i < rule.size(); ++i) total += (rule.weights[i] * half) * f(mid + half * rule.nodes[i]);
  }
  return total;
}

template <class V>
struct QuadratureResult {
  V value;
  double error_estimate = 0.0;
  int refinement = 0;
};

/// Adaptive composite Gauss-Legendre: bisect every panel until two successive
/// levels agree to `tol` (max-abs over components). Throws NumericalError with
/// the last difference when `max_refinement` is exhausted.
template <class F>
auto integrate(const F& f, double a, double b, std::span<const double> breakpoints,
               double max_frequency, double tol, int max_refinement = 12) {
  using V = std::decay_t<decltype(f(0.0))>;
  QuadratureResult<V> res{integrate_on_panels(f, panel_edges(a, b, breakpoints, max_frequency, 0)), 0.0, 0};
  for (int level = 1; level <= max_refinement; ++level) {
    V next = integrate_on_panels(f, panel_edges(a, b, breakpoints, max_frequency, level));
    V diff = next - res.value;
    res.error_estimate = detail::max_abs(diff);
    res.value = std::move(next);
    res.refinement = level;
    if (res.error_estimate <= tol) return res;
  }
  throw NumericalError("integrate: composite quadrature did not converge", res.error_estimate);
}

}  // namespace qutrit

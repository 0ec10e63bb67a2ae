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

#include "qutrit/quadrature.hpp"

#include <algorithm>

namespace qutrit {

GaussLegendreRule::GaussLegendreRule(int n) : nodes(n), weights(n) {
  require(n >= 1, "GaussLegendreRule: n must be >= 1");
  // Newton on P_n from the Chebyshev-like initial guess; symmetric pairs.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

const GaussLegendreRule& default_rule() {
  static const GaussLegendreRule rule(16);
  return rule;
}

std::vector<double> panel_edges(double a, double b, std::span<const double> breakpoints,
                                double max_frequency, int refinement, const GaussLegendreRule& rule) {
  std::vector<double> cuts{a};
  std::vector<double> inner(breakpoints.begin(), breakpoints.end());
  std::sort(inner.begin(), inner.end());
  for (double x : inner)
    if (x > a && x < b && x > cuts.back()) cuts.push_back(x);
  cuts.push_back(b);

  const long factor = 1L << refinement;
  std::vector<double> edges{a};
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double len = cuts[s + 1] - cuts[s];
    const double periods = len * std::abs(max_frequency) / (2.0 * kPi);
    const long base = std::max(1L, static_cast<long>(std::ceil(periods * 20.0 / rule.size())));
    const long panels = base * factor;
    for (long p = 1; p < panels; ++p) edges.push_back(cuts[s] + len * static_cast<double>(p) / panels);
    edges.push_back(cuts[s + 1]);
  }
  return edges;
}

}  // namespace qutrit

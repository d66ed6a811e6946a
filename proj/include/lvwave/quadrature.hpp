#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace lvwave {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Returns the n-point rule; rules are computed once per n and cached.
const GaussRule& gauss_legendre(int n);

/// Integrates f over [a, b] with a single n-point panel.
template <typename F>
double integrate(F&& f, double a, double b, int n = 16) {
  const GaussRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return half * sum;
}

/// Composite rule over consecutive breakpoints, `panels` equal panels per piece.
template <typename F>
double integrate_pieces(F&& f, std::span<const double> breaks, int panels, int n = 16) {
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    const double a = breaks[j];
    const double w = (breaks[j + 1] - a) / panels;
    for (int p = 0; p < panels; ++p) sum += integrate(f, a + p * w, a + (p + 1) * w, n);
  }
  return sum;
}

}  // namespace lvwave

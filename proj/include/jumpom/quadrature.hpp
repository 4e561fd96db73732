#pragma once

#include <vector>

namespace jumpom {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// n-point Gauss–Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// `panels` equal panels on [a, b], each with an `order`-point Gauss–Legendre rule.
QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b);

/// Panels spaced geometrically between a > 0 and b, for integrands that vary on
/// the scale of z itself (power-law Lévy densities near the origin).
QuadratureRule geometric_gauss_legendre(int panels, int order, double a, double b);

}  // namespace jumpom

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace capwave {

struct QuadratureNode {
  double x;
  double w;
};

// Gauss-Legendre rule mapped to [0, 1]. Interior nodes only, so endpoint
// singularities of the integrand are never evaluated.
inline std::vector<QuadratureNode> gauss_legendre_unit(int order) {
  if (order < 1 || order > 64) {
    throw std::invalid_argument("gauss_legendre_unit: order must be in [1, 64]");
  }
  std::vector<QuadratureNode> nodes(static_cast<std::size_t>(order));
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = {0.5 * (1.0 - z), 0.5 * w};
    nodes[static_cast<std::size_t>(n - 1 - i)] = {0.5 * (1.0 + z), 0.5 * w};
  }
  return nodes;
}

// Composite rule on the cells [edges[i], edges[i+1]].
inline std::vector<QuadratureNode> composite_gauss_legendre(
    const std::vector<double>& edges, int order) {
  const auto unit = gauss_legendre_unit(order);
  std::vector<QuadratureNode> out;
  if (edges.size() < 2) return out;
  out.reserve((edges.size() - 1) * unit.size());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i];
    const double width = edges[i + 1] - lo;
    if (!(width > 0.0)) continue;
    for (const auto& q : unit) out.push_back({lo + width * q.x, width * q.w});
  }
  return out;
}

}  // namespace capwave

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "kpn/epmgp.hpp"

namespace kpn {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on
/// the Legendre recurrence.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

/// Probability mass of an arbitrary smooth density over an axis-aligned
/// box by tensor Gauss-Legendre quadrature, 64 nodes per axis. Supports
/// d <= 3; this is the validation oracle, not an estimator ingredient.
template <class Density>
double probability_mass_quadrature(Density&& pdf, const AxisAlignedBox& box) {
  const int d = box.dim();
  if (d < 1 || d > 3)
    throw std::invalid_argument("probability_mass_quadrature: supports only d <= 3");
  if (!(box.half_width > 0.0))
    throw std::invalid_argument("probability_mass_quadrature: half width must be positive");

  static thread_local std::vector<double> nodes, weights;
  if (nodes.size() != 64) gauss_legendre(64, nodes, weights);

  const double eps = box.half_width;
  std::array<double, 3> x{};
  double total = 0.0;
  if (d == 1) {
    for (int a = 0; a < 64; ++a) {
      x[0] = box.center[0] + eps * nodes[a];
      total += weights[a] * pdf(std::span<const double>(x.data(), 1));
    }
  } else if (d == 2) {
    for (int a = 0; a < 64; ++a) {
      x[0] = box.center[0] + eps * nodes[a];
      double inner = 0.0;
      for (int b = 0; b < 64; ++b) {
        x[1] = box.center[1] + eps * nodes[b];
        inner += weights[b] * pdf(std::span<const double>(x.data(), 2));
      }
      total += weights[a] * inner;
    }
  } else {
    for (int a = 0; a < 64; ++a) {
      x[0] = box.center[0] + eps * nodes[a];
      double mid = 0.0;
      for (int b = 0; b < 64; ++b) {
        x[1] = box.center[1] + eps * nodes[b];
        double inner = 0.0;
        for (int c = 0; c < 64; ++c) {
          x[2] = box.center[2] + eps * nodes[c];
          inner += weights[c] * pdf(std::span<const double>(x.data(), 3));
        }
        mid += weights[b] * inner;
      }
      total += weights[a] * mid;
    }
  }
  return total * std::pow(eps, d);
}

}  // namespace kpn

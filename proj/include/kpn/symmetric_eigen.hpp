#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kpn {

/// Eigenvalues of a small dense symmetric matrix (row-major) by cyclic
/// Jacobi rotations. Plenty for the d <= 5 uses in this project.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, int d) {
  if (a.size() != static_cast<size_t>(d) * d)
    throw std::invalid_argument("symmetric_eigenvalues: size mismatch");
  auto idx = [d](int i, int j) { return static_cast<size_t>(i) * d + j; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += a[idx(i, j)] * a[idx(i, j)];
    if (off < 1e-30) break;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double apq = a[idx(p, q)];
        if (apq == 0.0) continue;
        const double app = a[idx(p, p)];
        const double aqq = a[idx(q, q)];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = a[idx(k, p)];
          const double akq = a[idx(k, q)];
          a[idx(k, p)] = c * akp - s * akq;
          a[idx(k, q)] = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a[idx(p, k)];
          const double aqk = a[idx(q, k)];
          a[idx(p, k)] = c * apk - s * aqk;
          a[idx(q, k)] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(d);
  for (int i = 0; i < d; ++i) ev[i] = a[idx(i, i)];
  return ev;
}

}  // namespace kpn

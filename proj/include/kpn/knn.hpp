#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kpn/sample_set.hpp"

namespace kpn {

/// Neighbour indices of one query point, distances nondecreasing, the
/// query row itself excluded. Ties are broken by ascending row index so
/// results do not depend on traversal order.
struct NeighborList {
  std::vector<int> indices;
  std::vector<double> distances;
};

inline double linf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

/// Exact m nearest neighbours of row i under the L-infinity norm.
/// Exhaustive scan with a bounded max-heap; candidates are abandoned as
/// soon as their partial coordinate max exceeds the current m-th best.
inline NeighborList knn_query(const SampleSet& s, int i, int m) {
  const int n = s.size();
  const int d = s.dim();
  if (i < 0 || i >= n) throw std::invalid_argument("knn_query: sample index out of range");
  if (m < 1 || m >= n) throw std::invalid_argument("knn_query: need 1 <= m <= n-1");

  const double* xi = s.row(i).data();
  const double* base = s.data().data();

  // max-heap on (distance, index); top is the worst kept neighbour
  std::vector<std::pair<double, int>> heap;
  heap.reserve(m + 1);

  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double* xj = base + static_cast<size_t>(j) * d;
    double dist = 0.0;
    if (static_cast<int>(heap.size()) < m) {
      for (int c = 0; c < d; ++c) dist = std::max(dist, std::abs(xi[c] - xj[c]));
      heap.emplace_back(dist, j);
      std::push_heap(heap.begin(), heap.end());
    } else {
      const double worst = heap.front().first;
      bool pruned = false;
      for (int c = 0; c < d; ++c) {
        dist = std::max(dist, std::abs(xi[c] - xj[c]));
        if (dist > worst) {
          pruned = true;
          break;
        }
      }
      if (pruned) continue;
      if (std::pair<double, int>(dist, j) < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = {dist, j};
        std::push_heap(heap.begin(), heap.end());
      }
    }
  }

  std::sort(heap.begin(), heap.end());
  NeighborList out;
  out.indices.reserve(m);
  out.distances.reserve(m);
  for (const auto& [dist, idx] : heap) {
    out.indices.push_back(idx);
    out.distances.push_back(dist);
  }
  return out;
}

/// L-infinity distance from row i to its k-th nearest neighbour.
inline double kth_distance(const SampleSet& s, int i, int k) {
  return knn_query(s, i, k).distances.back();
}

}  // namespace kpn

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kpn {

/// Immutable n x d matrix of samples, row major. Estimator input.
class SampleSet {
 public:
  SampleSet(int n, int d, std::vector<double> data)
      : n_(n), d_(d), data_(std::move(data)) {
    if (n < 2) throw std::invalid_argument("SampleSet: need at least two samples");
    if (d < 1) throw std::invalid_argument("SampleSet: dimension must be >= 1");
    if (data_.size() != static_cast<size_t>(n) * d)
      throw std::invalid_argument("SampleSet: data size does not match n*d");
    for (double v : data_)
      if (!std::isfinite(v)) throw std::invalid_argument("SampleSet: non-finite entry");
  }

  int size() const { return n_; }
  int dim() const { return d_; }

  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<size_t>(i) * d_, static_cast<size_t>(d_)};
  }

  std::span<const double> data() const { return data_; }

 private:
  int n_;
  int d_;
  std::vector<double> data_;
};

}  // namespace kpn

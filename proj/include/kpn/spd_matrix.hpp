#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace kpn {

/// Dense symmetric positive-definite matrix with a cached Cholesky factor.
/// Row-major storage; dimensions here stay small (d <= ~100), so plain
/// triple loops are all the linear algebra this project needs.
class SpdMatrix {
 public:
  explicit SpdMatrix(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim, 0.0) {
    if (dim < 1) throw std::invalid_argument("SpdMatrix: dimension must be >= 1");
  }

  static SpdMatrix identity(int dim) {
    SpdMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
  }

  int dim() const { return dim_; }

  double& at(int i, int j) { return a_[static_cast<size_t>(i) * dim_ + j]; }
  double at(int i, int j) const { return a_[static_cast<size_t>(i) * dim_ + j]; }

  std::span<const double> data() const { return a_; }

  bool symmetric_within(double rel_tol) const {
    double scale = 0.0;
    for (double v : a_) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return true;
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j)
        if (std::abs(at(i, j) - at(j, i)) > rel_tol * scale) return false;
    return true;
  }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += at(i, i);
    return t;
  }

  /// Adds delta to every diagonal entry and invalidates the factor.
  void add_to_diagonal(double delta) {
    for (int i = 0; i < dim_; ++i) at(i, i) += delta;
    factored_ = false;
  }

  /// Cholesky A = L L^T. Returns false (leaving no factor) when a pivot
  /// is non-positive or non-finite, i.e. the matrix is not numerically PD.
  bool factorize() {
    const int d = dim_;
    l_.assign(a_.size(), 0.0);
    for (int i = 0; i < d; ++i) {
      const double* li = &l_[static_cast<size_t>(i) * d];
      for (int j = 0; j <= i; ++j) {
        const double* lj = &l_[static_cast<size_t>(j) * d];
        double sum = at(i, j);
        for (int k = 0; k < j; ++k) sum -= li[k] * lj[k];
        if (i == j) {
          if (!(sum > 0.0) || !std::isfinite(sum)) {
            factored_ = false;
            return false;
          }
          l_[static_cast<size_t>(i) * d + j] = std::sqrt(sum);
        } else {
          l_[static_cast<size_t>(i) * d + j] = sum / lj[j];
        }
      }
    }
    factored_ = true;
    return true;
  }

  bool factorized() const { return factored_; }

  double log_det() const {
    require_factor();
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += std::log(l_[static_cast<size_t>(i) * dim_ + i]);
    return 2.0 * s;
  }

  /// Solves A x = rhs through the cached factor.
  std::vector<double> solve(std::span<const double> rhs) const {
    require_factor();
    if (static_cast<int>(rhs.size()) != dim_)
      throw std::invalid_argument("SpdMatrix::solve: size mismatch");
    std::vector<double> x(rhs.begin(), rhs.end());
    solve_in_place(x);
    return x;
  }

  void solve_in_place(std::vector<double>& x) const {
    require_factor();
    const int d = dim_;
    for (int i = 0; i < d; ++i) {
      const double* li = &l_[static_cast<size_t>(i) * d];
      double sum = x[i];
      for (int k = 0; k < i; ++k) sum -= li[k] * x[k];
      x[i] = sum / li[i];
    }
    for (int i = d - 1; i >= 0; --i) {
      double sum = x[i];
      for (int k = i + 1; k < d; ++k) sum -= l_[static_cast<size_t>(k) * d + i] * x[k];
      x[i] = sum / l_[static_cast<size_t>(i) * d + i];
    }
  }

  /// Row-major lower Cholesky factor; valid after factorize().
  const std::vector<double>& cholesky_factor() const {
    require_factor();
    return l_;
  }

  /// Diagonal of A^{-1}: column norms of L^{-1}.
  std::vector<double> inverse_diagonal() const {
    require_factor();
    const std::vector<double> linv = lower_inverse();
    const int d = dim_;
    std::vector<double> v(d, 0.0);
    for (int k = 0; k < d; ++k) {
      const double* lk = &linv[static_cast<size_t>(k) * d];
      for (int j = 0; j <= k; ++j) v[j] += lk[j] * lk[j];
    }
    return v;
  }

  /// Full inverse A^{-1} = L^{-T} L^{-1}, returned factored-state-clean.
  SpdMatrix inverse() const {
    require_factor();
    const std::vector<double> linv = lower_inverse();
    const int d = dim_;
    SpdMatrix inv(d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = 0.0;
        for (int k = i; k < d; ++k)
          sum += linv[static_cast<size_t>(k) * d + i] * linv[static_cast<size_t>(k) * d + j];
        inv.at(i, j) = sum;
        inv.at(j, i) = sum;
      }
    }
    return inv;
  }

 private:
  void require_factor() const {
    if (!factored_) throw std::logic_error("SpdMatrix: factorize() has not succeeded");
  }

  std::vector<double> lower_inverse() const {
    const int d = dim_;
    std::vector<double> linv(l_.size(), 0.0);
    for (int i = 0; i < d; ++i) {
      linv[static_cast<size_t>(i) * d + i] = 1.0 / l_[static_cast<size_t>(i) * d + i];
      for (int j = 0; j < i; ++j) {
        double sum = 0.0;
        for (int k = j; k < i; ++k)
          sum += l_[static_cast<size_t>(i) * d + k] * linv[static_cast<size_t>(k) * d + j];
        linv[static_cast<size_t>(i) * d + j] = -sum / l_[static_cast<size_t>(i) * d + i];
      }
    }
    return linv;
  }

  int dim_;
  std::vector<double> a_;
  std::vector<double> l_;
  bool factored_ = false;
};

}  // namespace kpn

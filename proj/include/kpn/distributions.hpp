#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpn/rng.hpp"
#include "kpn/sample_set.hpp"
#include "kpn/special_functions.hpp"
#include "kpn/spd_matrix.hpp"
#include "kpn/symmetric_eigen.hpp"

namespace kpn {

enum class Family { gaussian, gamma_product, beta_product, linear_manifold };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::gamma_product: return "gamma";
    case Family::beta_product: return "beta";
    case Family::linear_manifold: return "manifold";
  }
  return "?";
}

/// One test distribution: which family, its dimension, and the
/// family-specific parameter vectors.
struct DistributionSpec {
  Family family = Family::gaussian;
  int dim = 1;

  // gaussian: per-component means and standard deviations, plus a common
  // off-diagonal correlation coefficient (|r| < 1)
  std::vector<double> means, sigmas;
  double correlation = 0.0;

  // gamma product: shape k_i and scale theta_i per component
  std::vector<double> shapes, scales;

  // beta product
  std::vector<double> alphas, betas;

  // linear manifold: observation times; dim = times.size() + 1
  std::vector<double> times;
  double noise_var = 0.0;
};

inline void validate(const DistributionSpec& spec) {
  const int d = spec.dim;
  if (d < 1) throw std::invalid_argument("DistributionSpec: dim must be >= 1");
  auto check_size = [d](const std::vector<double>& v, const char* what) {
    if (static_cast<int>(v.size()) != d)
      throw std::invalid_argument(std::string("DistributionSpec: ") + what +
                                  " size does not match dim");
  };
  switch (spec.family) {
    case Family::gaussian:
      check_size(spec.means, "means");
      check_size(spec.sigmas, "sigmas");
      for (double s : spec.sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("DistributionSpec: sigma must be positive");
      if (!(std::abs(spec.correlation) < 1.0))
        throw std::invalid_argument("DistributionSpec: |correlation| must be < 1");
      break;
    case Family::gamma_product:
      check_size(spec.shapes, "shapes");
      check_size(spec.scales, "scales");
      for (double v : spec.shapes)
        if (!(v > 0.0)) throw std::invalid_argument("DistributionSpec: shape must be positive");
      for (double v : spec.scales)
        if (!(v > 0.0)) throw std::invalid_argument("DistributionSpec: scale must be positive");
      break;
    case Family::beta_product:
      check_size(spec.alphas, "alphas");
      check_size(spec.betas, "betas");
      for (double v : spec.alphas)
        if (!(v > 0.0)) throw std::invalid_argument("DistributionSpec: alpha must be positive");
      for (double v : spec.betas)
        if (!(v > 0.0)) throw std::invalid_argument("DistributionSpec: beta must be positive");
      break;
    case Family::linear_manifold:
      if (spec.times.empty())
        throw std::invalid_argument("DistributionSpec: manifold needs observation times");
      if (d != static_cast<int>(spec.times.size()) + 1)
        throw std::invalid_argument("DistributionSpec: manifold dim must be times + 1");
      if (!(spec.noise_var > 0.0))
        throw std::invalid_argument("DistributionSpec: noise variance must be positive");
      break;
  }
}

/// Gaussian covariance implied by the spec: sigma_i sigma_j r off the
/// diagonal, sigma_i^2 on it.
inline SpdMatrix gaussian_covariance(const DistributionSpec& spec) {
  const int d = spec.dim;
  SpdMatrix cov(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      cov.at(i, j) = (i == j) ? spec.sigmas[i] * spec.sigmas[i]
                              : spec.correlation * spec.sigmas[i] * spec.sigmas[j];
  return cov;
}

// ---- spec factories for the experiment families ----

inline DistributionSpec standard_gaussian(int d) {
  DistributionSpec s;
  s.family = Family::gaussian;
  s.dim = d;
  s.means.assign(d, 0.0);
  s.sigmas.assign(d, 1.0);
  return s;
}

/// 2-D zero-mean unit-variance Gaussian with correlation 0.5.
inline DistributionSpec grid_gaussian_2d() {
  DistributionSpec s = standard_gaussian(2);
  s.correlation = 0.5;
  return s;
}

/// 3-D independent Gamma with shapes (1.5, 3, 20), scales (2, 2.5, 1).
inline DistributionSpec grid_gamma_3d() {
  DistributionSpec s;
  s.family = Family::gamma_product;
  s.dim = 3;
  s.shapes = {1.5, 3.0, 20.0};
  s.scales = {2.0, 2.5, 1.0};
  return s;
}

/// 4-D independent Beta with (alpha, beta) pairs
/// (2,2), (2,5), (0.5,0.5), (5,1).
inline DistributionSpec grid_beta_4d() {
  DistributionSpec s;
  s.family = Family::beta_product;
  s.dim = 4;
  s.alphas = {2.0, 2.0, 0.5, 5.0};
  s.betas = {2.0, 5.0, 0.5, 1.0};
  return s;
}

namespace detail {
inline double ramp(double lo, double hi, int i, int d) {
  return d > 1 ? lo + (hi - lo) * static_cast<double>(i) / (d - 1) : lo;
}
}  // namespace detail

/// Independent Gaussian with sigma_i ramping uniformly over [0.2, 2].
inline DistributionSpec gaussian_sigma_ramp(int d) {
  DistributionSpec s = standard_gaussian(d);
  for (int i = 0; i < d; ++i) s.sigmas[i] = detail::ramp(0.2, 2.0, i, d);
  return s;
}

/// Independent Gamma with k_i ramping over [0.5, 5] and theta_i over [1, 2].
inline DistributionSpec gamma_ramp(int d) {
  DistributionSpec s;
  s.family = Family::gamma_product;
  s.dim = d;
  s.shapes.resize(d);
  s.scales.resize(d);
  for (int i = 0; i < d; ++i) {
    s.shapes[i] = detail::ramp(0.5, 5.0, i, d);
    s.scales[i] = detail::ramp(1.0, 2.0, i, d);
  }
  return s;
}

/// Independent Beta with alpha_i ascending over [0.5, 5] while beta_i
/// descends over the same range.
inline DistributionSpec beta_ramp(int d) {
  DistributionSpec s;
  s.family = Family::beta_product;
  s.dim = d;
  s.alphas.resize(d);
  s.betas.resize(d);
  for (int i = 0; i < d; ++i) {
    s.alphas[i] = detail::ramp(0.5, 5.0, i, d);
    s.betas[i] = detail::ramp(5.0, 0.5, i, d);
  }
  return s;
}

/// y_i = t_i x + noise observed at times 1..m; joint variable
/// [x, y_1, ..., y_m] of dimension m + 1.
inline DistributionSpec linear_manifold(int observations, double noise_var) {
  DistributionSpec s;
  s.family = Family::linear_manifold;
  s.dim = observations + 1;
  s.times.resize(observations);
  for (int i = 0; i < observations; ++i) s.times[i] = i + 1.0;
  s.noise_var = noise_var;
  return s;
}

/// Draws n samples; identical seeds give identical sample sets.
inline SampleSet sample(const DistributionSpec& spec, int n, std::uint64_t seed) {
  validate(spec);
  if (n < 2) throw std::invalid_argument("sample: need n >= 2");
  const int d = spec.dim;
  std::vector<double> data(static_cast<size_t>(n) * d);
  Rng rng(seed);

  switch (spec.family) {
    case Family::gaussian: {
      SpdMatrix cov = gaussian_covariance(spec);
      if (!cov.factorize()) throw std::invalid_argument("sample: covariance not positive definite");
      const std::vector<double>& lower = cov.cholesky_factor();
      std::vector<double> z(d);
      for (int r = 0; r < n; ++r) {
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        double* row = &data[static_cast<size_t>(r) * d];
        for (int i = 0; i < d; ++i) {
          double s = spec.means[i];
          for (int j = 0; j <= i; ++j) s += lower[static_cast<size_t>(i) * d + j] * z[j];
          row[i] = s;
        }
      }
      break;
    }
    case Family::gamma_product:
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < d; ++j)
          data[static_cast<size_t>(r) * d + j] = rng.gamma(spec.shapes[j]) * spec.scales[j];
      break;
    case Family::beta_product:
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < d; ++j)
          data[static_cast<size_t>(r) * d + j] = rng.beta(spec.alphas[j], spec.betas[j]);
      break;
    case Family::linear_manifold: {
      const double noise_sd = std::sqrt(spec.noise_var);
      for (int r = 0; r < n; ++r) {
        double* row = &data[static_cast<size_t>(r) * d];
        const double x = rng.normal();
        row[0] = x;
        for (size_t j = 0; j < spec.times.size(); ++j)
          row[j + 1] = spec.times[j] * x + noise_sd * rng.normal();
      }
      break;
    }
  }
  return SampleSet(n, d, std::move(data));
}

/// Closed-form differential entropy in nats.
inline double analytic_entropy(const DistributionSpec& spec) {
  validate(spec);
  const double log_2pi_e = std::log(2.0 * std::numbers::pi) + 1.0;
  switch (spec.family) {
    case Family::gaussian: {
      SpdMatrix cov = gaussian_covariance(spec);
      if (!cov.factorize())
        throw std::invalid_argument("analytic_entropy: covariance not positive definite");
      return 0.5 * (spec.dim * log_2pi_e + cov.log_det());
    }
    case Family::gamma_product: {
      double h = 0.0;
      for (int i = 0; i < spec.dim; ++i) {
        const double k = spec.shapes[i];
        h += k + std::log(spec.scales[i]) + log_gamma(k) + (1.0 - k) * digamma(k);
      }
      return h;
    }
    case Family::beta_product: {
      double h = 0.0;
      for (int i = 0; i < spec.dim; ++i) {
        const double a = spec.alphas[i];
        const double b = spec.betas[i];
        h += log_beta(a, b) - (a - 1.0) * (digamma(a) - digamma(a + b)) -
             (b - 1.0) * (digamma(b) - digamma(a + b));
      }
      return h;
    }
    case Family::linear_manifold: {
      // det of the joint covariance collapses to noise_var^m by the
      // Schur complement of the x block
      const int m = static_cast<int>(spec.times.size());
      return 0.5 * ((m + 1) * log_2pi_e + m * std::log(spec.noise_var));
    }
  }
  throw std::logic_error("analytic_entropy: unreachable");
}

struct PdfHessian {
  double density = 0.0;
  double lambda_min = 0.0;  // extreme eigenvalues of the density Hessian
  double lambda_max = 0.0;
};

namespace detail {

inline double pdf_value(const DistributionSpec& spec, std::span<const double> x) {
  const int d = spec.dim;
  switch (spec.family) {
    case Family::gaussian: {
      SpdMatrix cov = gaussian_covariance(spec);
      if (!cov.factorize())
        throw std::invalid_argument("pdf: covariance not positive definite");
      std::vector<double> diff(d);
      for (int i = 0; i < d; ++i) diff[i] = x[i] - spec.means[i];
      const std::vector<double> sol = cov.solve(diff);
      double quad = 0.0;
      for (int i = 0; i < d; ++i) quad += diff[i] * sol[i];
      return std::exp(-0.5 * quad - 0.5 * (d * std::log(2.0 * std::numbers::pi) + cov.log_det()));
    }
    case Family::gamma_product: {
      double logp = 0.0;
      for (int i = 0; i < d; ++i) {
        const double k = spec.shapes[i];
        const double th = spec.scales[i];
        if (!(x[i] > 0.0)) throw std::domain_error("pdf: gamma support is x > 0");
        logp += (k - 1.0) * std::log(x[i]) - x[i] / th - log_gamma(k) - k * std::log(th);
      }
      return std::exp(logp);
    }
    case Family::beta_product: {
      double logp = 0.0;
      for (int i = 0; i < d; ++i) {
        const double a = spec.alphas[i];
        const double b = spec.betas[i];
        if (!(x[i] > 0.0 && x[i] < 1.0)) throw std::domain_error("pdf: beta support is (0, 1)");
        logp += (a - 1.0) * std::log(x[i]) + (b - 1.0) * std::log1p(-x[i]) - log_beta(a, b);
      }
      return std::exp(logp);
    }
    default:
      throw std::invalid_argument("pdf: unsupported family");
  }
}

// Product-family density in extended precision. The second differences
// below divide by h^2 = 1e-10, so double-precision evaluations would
// leave ~1e-5 of relative noise in the Hessian; long double keeps it
// below the 1e-6 the diagnostics need.
inline long double pdf_value_ld(const DistributionSpec& spec, std::span<const long double> x) {
  const int d = spec.dim;
  long double logp = 0.0L;
  switch (spec.family) {
    case Family::gamma_product:
      for (int i = 0; i < d; ++i) {
        const long double k = spec.shapes[i];
        const long double th = spec.scales[i];
        if (!(x[i] > 0.0L)) throw std::domain_error("pdf: gamma support is x > 0");
        logp += (k - 1.0L) * std::log(x[i]) - x[i] / th - std::lgamma(k) - k * std::log(th);
      }
      return std::exp(logp);
    case Family::beta_product:
      for (int i = 0; i < d; ++i) {
        const long double a = spec.alphas[i];
        const long double b = spec.betas[i];
        if (!(x[i] > 0.0L && x[i] < 1.0L)) throw std::domain_error("pdf: beta support is (0, 1)");
        logp += (a - 1.0L) * std::log(x[i]) + (b - 1.0L) * std::log1p(-x[i]) -
                (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
      }
      return std::exp(logp);
    default:
      throw std::invalid_argument("pdf_value_ld: unsupported family");
  }
}

// Central-difference Hessian of a long-double density at step h.
template <class F>
inline void fd_hessian(F&& f, std::span<const double> x, int d, long double h,
                       std::vector<long double>& out) {
  std::vector<long double> pt(x.begin(), x.end());
  const long double f0 = f(std::span<const long double>(pt));
  for (int i = 0; i < d; ++i) {
    pt[i] = x[i] + h;
    const long double fp = f(std::span<const long double>(pt));
    pt[i] = x[i] - h;
    const long double fm = f(std::span<const long double>(pt));
    pt[i] = x[i];
    out[static_cast<size_t>(i) * d + i] = (fp - 2.0L * f0 + fm) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      pt[i] = x[i] + h; pt[j] = x[j] + h;
      const long double fpp = f(std::span<const long double>(pt));
      pt[j] = x[j] - h;
      const long double fpm = f(std::span<const long double>(pt));
      pt[i] = x[i] - h; pt[j] = x[j] + h;
      const long double fmp = f(std::span<const long double>(pt));
      pt[j] = x[j] - h;
      const long double fmm = f(std::span<const long double>(pt));
      pt[i] = x[i]; pt[j] = x[j];
      const long double v = (fpp - fpm - fmp + fmm) / (4.0L * h * h);
      out[static_cast<size_t>(i) * d + j] = v;
      out[static_cast<size_t>(j) * d + i] = v;
    }
  }
}

// Richardson pairing of steps h and h/2 cancels the leading h^2 error.
template <class F>
inline std::vector<double> richardson_hessian(F&& f, std::span<const double> x, int d,
                                              double step) {
  std::vector<long double> coarse(static_cast<size_t>(d) * d), fine(coarse.size());
  fd_hessian(f, x, d, static_cast<long double>(step), coarse);
  fd_hessian(f, x, d, 0.5L * static_cast<long double>(step), fine);
  std::vector<double> out(coarse.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>((4.0L * fine[i] - coarse[i]) / 3.0L);
  return out;
}

}  // namespace detail

/// Exact density at x plus the extreme eigenvalues of the density
/// Hessian: analytic for the Gaussian, Richardson-extrapolated central
/// differences (step 1e-5) for the finite/semi-finite support families.
inline PdfHessian analytic_pdf_and_hessian(const DistributionSpec& spec,
                                           std::span<const double> x) {
  validate(spec);
  const int d = spec.dim;
  if (d > 3)
    throw std::invalid_argument("analytic_pdf_and_hessian: supports only d <= 3");
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("analytic_pdf_and_hessian: point size mismatch");
  if (spec.family == Family::linear_manifold)
    throw std::invalid_argument("analytic_pdf_and_hessian: unsupported family");

  PdfHessian out;
  out.density = detail::pdf_value(spec, x);

  std::vector<double> hess(static_cast<size_t>(d) * d, 0.0);
  if (spec.family == Family::gaussian) {
    // H = p(x) (P u u^T P - P) with u = x - mu, P = cov^{-1}
    SpdMatrix cov = gaussian_covariance(spec);
    cov.factorize();
    const SpdMatrix prec = cov.inverse();
    std::vector<double> u(d);
    for (int i = 0; i < d; ++i) u[i] = x[i] - spec.means[i];
    std::vector<double> pu(d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) pu[i] += prec.at(i, j) * u[j];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        hess[static_cast<size_t>(i) * d + j] = out.density * (pu[i] * pu[j] - prec.at(i, j));
  } else {
    hess = detail::richardson_hessian(
        [&spec](std::span<const long double> pt) { return detail::pdf_value_ld(spec, pt); },
        x, d, 1e-5);
  }

  const std::vector<double> ev = symmetric_eigenvalues(hess, d);
  out.lambda_min = ev[0];
  out.lambda_max = ev[0];
  for (double v : ev) {
    out.lambda_min = std::min(out.lambda_min, v);
    out.lambda_max = std::max(out.lambda_max, v);
  }
  return out;
}

}  // namespace kpn

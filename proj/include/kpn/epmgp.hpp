#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "kpn/rng.hpp"
#include "kpn/spd_matrix.hpp"
#include "kpn/truncated_normal.hpp"

namespace kpn {

/// L-infinity ball: the box [center - half_width, center + half_width]^d.
struct AxisAlignedBox {
  std::vector<double> center;
  double half_width = 0.0;

  int dim() const { return static_cast<int>(center.size()); }
};

struct GaussianModel {
  std::vector<double> mean;
  SpdMatrix cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Working state of one EP run: per-dimension site natural parameters and
/// the current Gaussian approximation of the box-restricted density.
struct EpState {
  std::vector<double> site_precision;  // tau_j >= 0
  std::vector<double> site_shift;      // nu_j
  std::vector<double> approx_mean;
  std::vector<double> approx_var_diag;
  double log_z = 0.0;
};

struct BoxMassResult {
  double log_mass = 0.0;
  bool converged = false;
  int sweeps = 0;
};

namespace ep_detail {

inline constexpr double kDamping = 0.5;
inline constexpr int kMaxSweeps = 60;
inline constexpr double kSiteTol = 1e-8;

struct SiteUpdate {
  double tau;
  double nu;
};

// Moment-match one site against its cavity. Cavity precision must be
// positive; callers skip the site otherwise.
inline SiteUpdate match_site(double cav_prec, double cav_mean, double b) {
  const double cav_var = 1.0 / cav_prec;
  const TruncatedMoments tm = truncated_normal_moments(cav_mean, cav_var, -b, b);
  double tau = 1.0 / tm.variance - cav_prec;
  if (tau < 0.0) tau = 0.0;  // projection keeps the approximation PD
  const double nu = tm.mean / tm.variance - cav_mean * cav_prec;
  return {tau, nu};
}

}  // namespace ep_detail

/// True when a covariance is numerically usable by gaussian_box_logmass:
/// positive diagonal and a factorizable unit-diagonal rescaling. A matrix
/// can pass a raw Cholesky at roundoff level yet fail here, so jitter
/// policies must gate on this check.
inline bool box_mass_accepts(const SpdMatrix& cov) {
  const int d = cov.dim();
  std::vector<double> scale(d);
  for (int j = 0; j < d; ++j) {
    const double v = cov.at(j, j);
    if (!(v > 0.0)) return false;
    scale[j] = std::sqrt(v);
  }
  SpdMatrix corr(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) corr.at(i, j) = cov.at(i, j) / (scale[i] * scale[j]);
  return corr.factorize();
}

/// log of the probability mass of the normalized Gaussian over the box,
/// computed by per-dimension expectation propagation. The computation is
/// carried out in box-centered, diagonally standardized coordinates, so
/// the result is exactly invariant under translation and isotropic
/// rescaling of the inputs.
///
/// Non-convergence after the sweep cap is reported through the flag, not
/// an error; the last iterate is still a usable estimate.
inline BoxMassResult gaussian_box_logmass(const GaussianModel& g, const AxisAlignedBox& box) {
  const int d = g.dim();
  if (d != box.dim() || d != g.cov.dim())
    throw std::invalid_argument("gaussian_box_logmass: dimension mismatch");
  if (!(box.half_width > 0.0))
    throw std::invalid_argument("gaussian_box_logmass: half width must be positive");

  // standardize: z_j = (x_j - center_j) / sqrt(S_jj)
  std::vector<double> scale(d);
  for (int j = 0; j < d; ++j) {
    const double v = g.cov.at(j, j);
    if (!(v > 0.0)) throw std::runtime_error("gaussian_box_logmass: covariance not positive definite");
    scale[j] = std::sqrt(v);
  }
  SpdMatrix corr(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) corr.at(i, j) = g.cov.at(i, j) / (scale[i] * scale[j]);
  std::vector<double> mu(d), b(d);
  for (int j = 0; j < d; ++j) {
    mu[j] = (g.mean[j] - box.center[j]) / scale[j];
    b[j] = box.half_width / scale[j];
  }

  if (!corr.factorize())
    throw std::runtime_error("gaussian_box_logmass: covariance not positive definite");
  const double log_det_corr = corr.log_det();
  const SpdMatrix prec = corr.inverse();  // prior precision in z coordinates

  std::vector<double> h(d, 0.0);  // prec * mu
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += prec.at(i, j) * mu[j];
    h[i] = s;
  }

  EpState st;
  st.site_precision.assign(d, 0.0);
  st.site_shift.assign(d, 0.0);

  // warm start: match every site against its prior marginal (for a
  // diagonal covariance this lands exactly on the fixed point)
  for (int j = 0; j < d; ++j) {
    const double prior_var = corr.at(j, j);  // == 1 after standardization
    const auto s0 = ep_detail::match_site(1.0 / prior_var, mu[j], b[j]);
    st.site_precision[j] = s0.tau;
    st.site_shift[j] = s0.nu;
  }

  SpdMatrix kq(d);
  std::vector<double> hq(d);
  auto refresh = [&](void) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) kq.at(i, j) = prec.at(i, j);
    for (int j = 0; j < d; ++j) kq.at(j, j) += st.site_precision[j];
    if (!kq.factorize())
      throw std::runtime_error("gaussian_box_logmass: EP precision matrix lost definiteness");
    for (int j = 0; j < d; ++j) hq[j] = h[j] + st.site_shift[j];
    st.approx_mean = kq.solve(hq);
    st.approx_var_diag = kq.inverse_diagonal();
  };

  BoxMassResult result;
  for (int sweep = 1; sweep <= ep_detail::kMaxSweeps; ++sweep) {
    refresh();
    double max_change = 0.0;
    for (int j = 0; j < d; ++j) {
      const double vj = st.approx_var_diag[j];
      const double mj = st.approx_mean[j];
      const double cav_prec = 1.0 / vj - st.site_precision[j];
      if (!(cav_prec > 0.0)) continue;
      const double cav_mean = (mj / vj - st.site_shift[j]) / cav_prec;
      const auto upd = ep_detail::match_site(cav_prec, cav_mean, b[j]);
      const double tau = (1.0 - ep_detail::kDamping) * st.site_precision[j] + ep_detail::kDamping * upd.tau;
      const double nu = (1.0 - ep_detail::kDamping) * st.site_shift[j] + ep_detail::kDamping * upd.nu;
      max_change = std::max({max_change, std::abs(tau - st.site_precision[j]),
                             std::abs(nu - st.site_shift[j])});
      st.site_precision[j] = tau;
      st.site_shift[j] = nu;
    }
    result.sweeps = sweep;
    if (max_change < ep_detail::kSiteTol) {
      result.converged = true;
      break;
    }
  }

  // assemble log Z from the final sites and cavities
  refresh();
  double log_z = 0.0;
  for (int j = 0; j < d; ++j) {
    const double vj = st.approx_var_diag[j];
    const double mj = st.approx_mean[j];
    double cav_prec = 1.0 / vj - st.site_precision[j];
    if (!(cav_prec > 0.0)) cav_prec = 1e-12 / vj;  // pathological stall guard
    const double cav_mean = (mj / vj - st.site_shift[j]) / cav_prec;
    const double cav_var = 1.0 / cav_prec;
    const TruncatedMoments tm = truncated_normal_moments(cav_mean, cav_var, -b[j], b[j]);
    const double t = cav_mean * cav_prec + st.site_shift[j];
    log_z += tm.log_mass + 0.5 * std::log1p(st.site_precision[j] * cav_var) +
             0.5 * (cav_mean * cav_mean * cav_prec - t * t / (cav_prec + st.site_precision[j]));
  }
  double quad_posterior = 0.0, quad_prior = 0.0;
  for (int j = 0; j < d; ++j) {
    quad_posterior += hq[j] * st.approx_mean[j];
    quad_prior += h[j] * mu[j];
  }
  log_z += 0.5 * (quad_posterior - quad_prior) - 0.5 * kq.log_det() - 0.5 * log_det_corr;

  st.log_z = log_z;
  result.log_mass = std::min(log_z, 0.0);  // a probability mass cannot exceed 1
  return result;
}

/// Monte-Carlo estimate of the same log-mass; test and diagnostic oracle.
/// Returns -inf when no draw lands in the box.
inline double gaussian_box_logmass_mc(const GaussianModel& g, const AxisAlignedBox& box,
                                      std::int64_t n, std::uint64_t seed) {
  const int d = g.dim();
  if (d != box.dim() || d != g.cov.dim())
    throw std::invalid_argument("gaussian_box_logmass_mc: dimension mismatch");
  if (n < 1) throw std::invalid_argument("gaussian_box_logmass_mc: need n >= 1");
  SpdMatrix cov = g.cov;
  if (!cov.factorize())
    throw std::runtime_error("gaussian_box_logmass_mc: covariance not positive definite");
  const std::vector<double>& lower = cov.cholesky_factor();
  Rng rng(seed);
  std::vector<double> z(d);
  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < n; ++t) {
    for (int j = 0; j < d; ++j) z[j] = rng.normal();
    bool inside = true;
    for (int i = 0; i < d && inside; ++i) {
      double s = g.mean[i];
      for (int j = 0; j <= i; ++j) s += lower[static_cast<size_t>(i) * d + j] * z[j];
      inside = std::abs(s - box.center[i]) <= box.half_width;
    }
    if (inside) ++hits;
  }
  if (hits == 0) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(hits)) - std::log(static_cast<double>(n));
}

}  // namespace kpn

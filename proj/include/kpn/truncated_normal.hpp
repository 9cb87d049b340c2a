#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kpn/special_functions.hpp"

namespace kpn {

/// Sentinels for unbounded truncation sides. They are branched on
/// explicitly; no arithmetic is ever done with them.
inline constexpr double kUnboundedBelow = -std::numeric_limits<double>::infinity();
inline constexpr double kUnboundedAbove = std::numeric_limits<double>::infinity();

/// Mass below this is treated as numerically empty (Z < 1e-300).
inline constexpr double kTailDegenerateLogMass = -690.77552789821371;

struct TruncatedMoments {
  double log_mass;  // log of the truncated probability mass
  double mean;
  double variance;
};

inline bool tail_degenerate(const TruncatedMoments& m) {
  return m.log_mass < kTailDegenerateLogMass;
}

namespace detail {

// Moments of the standard normal truncated to [alpha, beta] with
// 0 <= alpha < beta < inf. Everything runs through erfcx so that deep
// tails neither underflow nor cancel.
inline TruncatedMoments std_tail_moments(double alpha, double beta) {
  const double ea = erfcx(alpha * kInvSqrt2);
  const double eb = erfcx(beta * kInvSqrt2);
  const double delta = 0.5 * (beta - alpha) * (beta + alpha);
  // D = ea - eb e^{-delta}, as ea * (1 - exp(log(eb/ea) - delta))
  const double lam = std::log(eb) - std::log(ea) - delta;
  const double one_minus_ratio = -std::expm1(lam);
  const double dd = ea * one_minus_ratio;
  const double log_mass = std::log(0.5 * dd) - 0.5 * alpha * alpha;
  const double u = -std::expm1(-delta);  // 1 - e^{-delta}
  const double r_mean = kSqrt2OverPi * u / dd;
  const double r_var = kSqrt2OverPi * (alpha - beta * std::exp(-delta)) / dd;
  return {log_mass, r_mean, 1.0 + r_var - r_mean * r_mean};
}

// Moments of the standard normal truncated to [alpha, inf).
inline TruncatedMoments std_half_line_moments(double alpha) {
  double r;  // phi(alpha) / Q(alpha)
  if (alpha >= 0.0) {
    r = kSqrt2OverPi / erfcx(alpha * kInvSqrt2);
  } else {
    const double q = 0.5 * std::erfc(alpha * kInvSqrt2);
    r = std::exp(std_normal_logpdf(alpha)) / q;
  }
  const double log_mass = std_normal_logcdf(-alpha);
  return {log_mass, r, 1.0 + alpha * r - r * r};
}

}  // namespace detail

/// Mean, variance and log-mass of N(mu, var) truncated to [lo, hi].
/// Unbounded sides are the kUnbounded* sentinels. The result is finite
/// for any interval; masses below 1e-300 are flagged by tail_degenerate.
inline TruncatedMoments truncated_normal_moments(double mu, double var, double lo, double hi) {
  if (!(var > 0.0)) throw std::domain_error("truncated_normal_moments: variance must be positive");
  const bool lo_open = std::isinf(lo) && lo < 0.0;
  const bool hi_open = std::isinf(hi) && hi > 0.0;
  if (!lo_open && !std::isfinite(lo)) throw std::domain_error("truncated_normal_moments: bad lower bound");
  if (!hi_open && !std::isfinite(hi)) throw std::domain_error("truncated_normal_moments: bad upper bound");
  if (!lo_open && !hi_open && !(lo < hi))
    throw std::domain_error("truncated_normal_moments: interval is empty");

  if (lo_open && hi_open) return {0.0, mu, var};

  const double sigma = std::sqrt(var);
  TruncatedMoments std_m{};  // moments in standardized coordinates
  if (hi_open) {
    std_m = detail::std_half_line_moments((lo - mu) / sigma);
  } else if (lo_open) {
    TruncatedMoments r = detail::std_half_line_moments(-(hi - mu) / sigma);
    std_m = {r.log_mass, -r.mean, r.variance};
  } else {
    const double alpha = (lo - mu) / sigma;
    const double beta = (hi - mu) / sigma;
    if (alpha >= 0.0) {
      std_m = detail::std_tail_moments(alpha, beta);
    } else if (beta <= 0.0) {
      TruncatedMoments r = detail::std_tail_moments(-beta, -alpha);
      std_m = {r.log_mass, -r.mean, r.variance};
    } else {
      // interval straddles the mean; plain erf arithmetic is stable here
      const double z = 0.5 * (std::erf(beta * kInvSqrt2) + std::erf(-alpha * kInvSqrt2));
      const double ra = std::exp(std_normal_logpdf(alpha)) / z;
      const double rb = std::exp(std_normal_logpdf(beta)) / z;
      std_m = {std::log(z), ra - rb, 1.0 + alpha * ra - beta * rb - (ra - rb) * (ra - rb)};
    }
  }

  TruncatedMoments out;
  out.log_mass = std_m.log_mass;
  out.mean = mu + sigma * std_m.mean;
  out.variance = var * std_m.variance;
  // guard the invariants against roundoff in extreme tails
  if (!lo_open) out.mean = std::max(out.mean, lo);
  if (!hi_open) out.mean = std::min(out.mean, hi);
  out.variance = std::min(out.variance, var);
  if (!(out.variance > 0.0)) out.variance = std::numeric_limits<double>::min();
  return out;
}

}  // namespace kpn

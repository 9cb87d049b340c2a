#pragma once

#include <cmath>
#include <stdexcept>

namespace kpn {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973641;
inline constexpr double kInvSqrt2 = 0.70710678118654752440084436210;
inline constexpr double kInvSqrtPi = 0.56418958354775628694807945156;
inline constexpr double kSqrt2OverPi = 0.79788456080286535587989211987;

/// Digamma function for x > 0. Upward recurrence to x >= 6, then the
/// asymptotic series with Bernoulli terms through B14; absolute error
/// stays below 1e-12 over the positive axis.
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12.0 -
      inv2 * (1.0 / 120.0 -
      inv2 * (1.0 / 252.0 -
      inv2 * (1.0 / 240.0 -
      inv2 * (1.0 / 132.0 -
      inv2 * (691.0 / 32760.0 -
      inv2 * (1.0 / 12.0)))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

/// Scaled complementary error function exp(x^2) erfc(x) for x >= 0.
/// Direct product below 4, Lentz continued fraction above (where the
/// direct product would square-overflow long before erfc underflows).
inline double erfcx(double x) {
  if (x < 0.0) throw std::domain_error("erfcx: negative argument unsupported");
  if (x < 4.0) return std::exp(x * x) * std::erfc(x);
  // erfc(x) e^{x^2} sqrt(pi) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  const double tiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int n = 1; n <= 200; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double ratio = c * d;
    f *= ratio;
    if (std::abs(ratio - 1.0) < 1e-17) break;
  }
  return kInvSqrtPi / f;
}

/// Standard normal CDF.
inline double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

/// log of the standard normal density.
inline double std_normal_logpdf(double z) {
  return -0.5 * z * z - kLogSqrt2Pi;
}

/// log Phi(z), accurate over the whole line. The left tail switches to
/// the scaled erfc so nothing underflows until z is far below -38.
inline double std_normal_logcdf(double z) {
  if (z >= 0.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
  if (z > -6.0) return std::log(0.5 * std::erfc(-z * kInvSqrt2));
  const double x = -z * kInvSqrt2;
  return std::log(0.5 * erfcx(x)) - x * x;
}

inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  return std::lgamma(x);
}

inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace kpn

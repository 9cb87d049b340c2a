#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kpn/epmgp.hpp"
#include "kpn/knn.hpp"
#include "kpn/sample_set.hpp"
#include "kpn/special_functions.hpp"
#include "kpn/spd_matrix.hpp"

namespace kpn {

struct EstimatorConfig {
  int k = 4;                   // ball neighbour order
  int p = 0;                   // local-Gaussian neighbour count, p >= k
  double jitter_start = 1e-12;
  double jitter_max = 1e-4;
};

enum class EntropyMethod { kl, kpn };

inline const char* method_name(EntropyMethod m) {
  return m == EntropyMethod::kl ? "KL" : "kPN";
}

/// Per-sample working record of the local-Gaussian construction.
struct NeighborhoodSummary {
  double eps = 0.0;                  // k-th neighbour L-inf distance
  std::vector<int> neighbor_indices; // the p neighbours, self excluded
  std::vector<double> local_mean;
  SpdMatrix local_cov;
  double log_g_at_xi = 0.0;          // log of the unit-peak Gaussian at x_i
  double log_g_mass = 0.0;           // log integral of that Gaussian over the box
  bool ep_converged = true;

  NeighborhoodSummary() : local_cov(1) {}
};

/// Entropy estimate in nats plus its exact term decomposition. The
/// estimate always equals the sum of the stored terms.
struct EntropyReport {
  double estimate = 0.0;
  EntropyMethod method = EntropyMethod::kl;
  double term_psi = 0.0;            // psi(N) - psi(k)
  double term_log_volume = 0.0;     // KL only: d log 2
  double term_mean_log_eps = 0.0;   // KL only: (d/N) sum log eps_i
  double term_mean_log_g = 0.0;     // kpN only: -(1/N) sum log g(x_i)
  double term_mean_log_mass = 0.0;  // kpN only: (1/N) sum log G_i
  int n = 0;
  int d = 0;
  int k = 0;
  int p = 0;
  double jitter_start = 0.0;
  double jitter_max = 0.0;
  int ep_nonconverged = 0;
};

namespace estimator_detail {

inline void throw_on_duplicates(const std::vector<int>& dup_rows) {
  if (dup_rows.empty()) return;
  std::ostringstream msg;
  msg << "duplicate samples (zero k-th neighbour distance) at rows:";
  for (int i : dup_rows) msg << ' ' << i;
  throw std::runtime_error(msg.str());
}

// First stored exception (by sample index) wins, so failures are
// reported deterministically no matter the thread schedule.
inline void rethrow_first(const std::vector<std::exception_ptr>& errs) {
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace estimator_detail

/// Kozachenko-Leonenko estimate with the L-infinity unit-ball volume 2^d.
inline EntropyReport estimate_kl(const SampleSet& s, int k) {
  const int n = s.size();
  const int d = s.dim();
  if (k < 1 || k >= n) throw std::invalid_argument("estimate_kl: need 1 <= k <= n-1");

  std::vector<double> eps(n, 0.0);
  std::vector<std::exception_ptr> errs(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    try {
      eps[i] = kth_distance(s, i, k);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  }
  estimator_detail::rethrow_first(errs);

  std::vector<int> dup_rows;
  for (int i = 0; i < n; ++i)
    if (eps[i] <= 0.0) dup_rows.push_back(i);
  estimator_detail::throw_on_duplicates(dup_rows);

  double sum_log_eps = 0.0;
  for (int i = 0; i < n; ++i) sum_log_eps += std::log(eps[i]);

  EntropyReport r;
  r.method = EntropyMethod::kl;
  r.term_psi = digamma(n) - digamma(k);
  r.term_log_volume = d * std::log(2.0);
  r.term_mean_log_eps = (static_cast<double>(d) / n) * sum_log_eps;
  r.estimate = r.term_psi + r.term_log_volume + r.term_mean_log_eps;
  r.n = n;
  r.d = d;
  r.k = k;
  return r;
}

/// Builds the local Gaussian picture around sample i: the k-th neighbour
/// box, the p-neighbour mean/covariance (self excluded), the log of the
/// unit-peak Gaussian at x_i and the log of its mass over the box.
/// Covariances that fail to factorize get diagonal jitter escalated
/// tenfold from jitter_start to jitter_max before giving up.
inline NeighborhoodSummary summarize_neighborhood(const SampleSet& s, int i,
                                                  const EstimatorConfig& cfg) {
  const int d = s.dim();
  NeighborhoodSummary out;

  NeighborList nb = knn_query(s, i, cfg.p);
  out.eps = nb.distances[cfg.k - 1];
  if (out.eps <= 0.0) {
    out.neighbor_indices = std::move(nb.indices);
    return out;  // duplicate; caller reports all offending rows at once
  }

  std::vector<double> mean(d, 0.0);
  for (int idx : nb.indices) {
    const auto row = s.row(idx);
    for (int c = 0; c < d; ++c) mean[c] += row[c];
  }
  for (int c = 0; c < d; ++c) mean[c] /= cfg.p;

  SpdMatrix cov(d);
  std::vector<double> diff(d);
  for (int idx : nb.indices) {
    const auto row = s.row(idx);
    for (int c = 0; c < d; ++c) diff[c] = row[c] - mean[c];
    for (int a = 0; a < d; ++a) {
      double* cov_row = &cov.at(a, 0);
      const double da = diff[a];
      for (int b = a; b < d; ++b) cov_row[b] += da * diff[b];
    }
  }
  const double norm = cfg.p > 1 ? 1.0 / (cfg.p - 1) : 1.0;
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      cov.at(a, b) *= norm;
      cov.at(b, a) = cov.at(a, b);
    }

  const double trace = cov.trace();
  if (!cov.factorize() || !box_mass_accepts(cov)) {
    double delta = cfg.jitter_start;
    for (;;) {
      if (delta > cfg.jitter_max) {
        std::ostringstream msg;
        msg << "local covariance at sample " << i
            << " not factorizable after jitter escalation to " << cfg.jitter_max;
        throw std::runtime_error(msg.str());
      }
      SpdMatrix jittered = cov;
      jittered.add_to_diagonal(delta * trace / d);
      if (jittered.factorize() && box_mass_accepts(jittered)) {
        cov = std::move(jittered);
        break;
      }
      delta *= 10.0;
    }
  }

  const auto xi = s.row(i);
  for (int c = 0; c < d; ++c) diff[c] = xi[c] - mean[c];
  const std::vector<double> solved = cov.solve(diff);
  double quad = 0.0;
  for (int c = 0; c < d; ++c) quad += diff[c] * solved[c];
  out.log_g_at_xi = -0.5 * quad;

  GaussianModel g{mean, cov};
  AxisAlignedBox box{std::vector<double>(xi.begin(), xi.end()), out.eps};
  const BoxMassResult mass = gaussian_box_logmass(g, box);
  // Eq. for G integrates the unit-peak Gaussian, so undo the N(mu,S)
  // normalization of the EP result.
  out.log_g_mass = mass.log_mass + 0.5 * (d * std::log(2.0 * 3.14159265358979323846) + cov.log_det());
  out.ep_converged = mass.converged;

  out.neighbor_indices = std::move(nb.indices);
  out.local_mean = std::move(mean);
  out.local_cov = std::move(cov);
  return out;
}

/// kpN estimate: the constant-density ball assumption of KL replaced by
/// the p-neighbour local Gaussian, its in-box mass computed by EP.
inline EntropyReport estimate_kpn(const SampleSet& s, const EstimatorConfig& cfg) {
  const int n = s.size();
  const int d = s.dim();
  if (cfg.k < 1 || cfg.k > cfg.p || cfg.p >= n)
    throw std::invalid_argument("estimate_kpn: need 1 <= k <= p <= n-1");
  if (cfg.p <= d)
    std::cerr << "kpn: warning: p = " << cfg.p << " <= d = " << d
              << "; local covariances will be rank deficient and carried by jitter\n";

  std::vector<double> log_g(n, 0.0), log_mass(n, 0.0);
  std::vector<char> converged(n, 1), duplicate(n, 0);
  std::vector<std::exception_ptr> errs(n);

#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i) {
    try {
      NeighborhoodSummary ns = summarize_neighborhood(s, i, cfg);
      if (ns.eps <= 0.0) {
        duplicate[i] = 1;
        continue;
      }
      log_g[i] = ns.log_g_at_xi;
      log_mass[i] = ns.log_g_mass;
      converged[i] = ns.ep_converged ? 1 : 0;
    } catch (...) {
      errs[i] = std::current_exception();
    }
  }

  std::vector<int> dup_rows;
  for (int i = 0; i < n; ++i)
    if (duplicate[i]) dup_rows.push_back(i);
  estimator_detail::throw_on_duplicates(dup_rows);
  estimator_detail::rethrow_first(errs);

  double sum_log_g = 0.0, sum_log_mass = 0.0;
  int nonconverged = 0;
  for (int i = 0; i < n; ++i) {
    sum_log_g += log_g[i];
    sum_log_mass += log_mass[i];
    if (!converged[i]) ++nonconverged;
  }

  EntropyReport r;
  r.method = EntropyMethod::kpn;
  r.term_psi = digamma(n) - digamma(cfg.k);
  r.term_mean_log_g = -sum_log_g / n;
  r.term_mean_log_mass = sum_log_mass / n;
  r.estimate = r.term_psi + r.term_mean_log_g + r.term_mean_log_mass;
  r.n = n;
  r.d = d;
  r.k = cfg.k;
  r.p = cfg.p;
  r.jitter_start = cfg.jitter_start;
  r.jitter_max = cfg.jitter_max;
  r.ep_nonconverged = nonconverged;
  return r;
}

/// Bounds on the probability-mass error of the constant-density
/// approximation: (|lambda|/3) d 2^{d-1} eps^{d+2} for the extreme
/// Hessian eigenvalues at the box center.
inline std::pair<double, double> kl_mass_bounds(double lambda_min, double lambda_max,
                                                double eps, int d) {
  const double geom = d * std::pow(2.0, d - 1) * std::pow(eps, d + 2) / 3.0;
  return {std::abs(lambda_min) * geom, std::abs(lambda_max) * geom};
}

}  // namespace kpn

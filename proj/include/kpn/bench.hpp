#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kpn/distributions.hpp"
#include "kpn/estimators.hpp"

namespace kpn::bench {

enum class ExperimentKind { grid, dim_sweep, manifold };

/// One experiment campaign. Only the fields that apply to the chosen
/// kind are consulted.
struct ExperimentPlan {
  ExperimentKind kind = ExperimentKind::grid;
  std::vector<DistributionSpec> specs;   // grid: the fixed test distributions
  std::vector<Family> families;          // dim sweep: which parameter ramps
  std::vector<int> n_values;
  std::vector<int> k_values;
  std::vector<double> p_frac_values;
  std::vector<int> dim_values;           // dim sweep / manifold: joint dimensions
  std::vector<double> noise_values;      // manifold only
  int ensembles = 50;
  std::uint64_t base_seed = 0;
};

/// Aggregated statistics of one (distribution, n, k, p, method) cell.
struct ResultRow {
  std::string experiment;
  std::string method;
  std::string family;
  int n = 0, d = 0, k = 0, p = 0, ensembles = 0;
  double analytic_entropy = 0.0;
  double mean_rel_err_pct = 0.0;
  double var_rel_err_pct = 0.0;
  double mean_abs_err = 0.0;
  int ep_nonconverged = 0;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string error;
};

/// Per-member raw estimate, enough to recompute every aggregate.
struct RawRow {
  std::string experiment;
  int member = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
};

struct BenchResult {
  std::vector<ResultRow> rows;
  std::vector<RawRow> raw;

  int failed_cells() const {
    int c = 0;
    for (const auto& r : rows) c += r.failed ? 1 : 0;
    return c;
  }
};

namespace detail {

inline int choose_p(double p_frac, int n, int k, int d) {
  // floor(p_frac*n + 0.5), but never below max(k, d+2) or the local
  // covariance is rank deficient by construction
  int p = static_cast<int>(std::lround(p_frac * n));
  p = std::max(p, std::max(k, d + 2));
  return std::min(p, n - 1);
}

inline std::string cell_id(const char* kind, const DistributionSpec& spec, int n, int k, int p,
                           EntropyMethod method, double noise = -1.0) {
  std::ostringstream os;
  os << kind << ':' << family_name(spec.family) << ":d" << spec.dim << ":n" << n << ":k" << k
     << ":p" << p;
  if (noise >= 0.0) os << ":noise" << noise;
  os << ':' << method_name(method);
  return os.str();
}

/// Runs `ensembles` member estimates of one cell and aggregates. A
/// member failure marks the whole cell failed but never aborts the run.
inline void run_cell(const char* kind, const DistributionSpec& spec, int n, int k, int p,
                     EntropyMethod method, const ExperimentPlan& plan, BenchResult& out,
                     double noise_tag = -1.0) {
  ResultRow row;
  row.experiment = cell_id(kind, spec, n, k, p, method, noise_tag);
  row.method = method_name(method);
  row.family = family_name(spec.family);
  row.n = n;
  row.d = spec.dim;
  row.k = k;
  row.p = p;
  row.ensembles = plan.ensembles;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const double h_true = analytic_entropy(spec);
    row.analytic_entropy = h_true;
    std::vector<double> estimates;
    estimates.reserve(plan.ensembles);
    int nonconverged = 0;
    for (int j = 0; j < plan.ensembles; ++j) {
      const std::uint64_t seed = plan.base_seed + static_cast<std::uint64_t>(j);
      const SampleSet s = sample(spec, n, seed);
      EntropyReport rep;
      if (method == EntropyMethod::kl) {
        rep = estimate_kl(s, k);
      } else {
        EstimatorConfig cfg;
        cfg.k = k;
        cfg.p = p;
        rep = estimate_kpn(s, cfg);
      }
      estimates.push_back(rep.estimate);
      nonconverged += rep.ep_nonconverged;
      out.raw.push_back({row.experiment, j, seed, rep.estimate});
    }
    double mean_rel = 0.0, mean_abs = 0.0;
    for (double est : estimates) {
      mean_rel += 100.0 * std::abs(h_true - est) / h_true;
      mean_abs += std::abs(h_true - est);
    }
    mean_rel /= estimates.size();
    mean_abs /= estimates.size();
    double var_rel = 0.0;
    if (estimates.size() > 1) {
      for (double est : estimates) {
        const double e = 100.0 * std::abs(h_true - est) / h_true;
        var_rel += (e - mean_rel) * (e - mean_rel);
      }
      var_rel /= (estimates.size() - 1);
    }
    row.mean_rel_err_pct = mean_rel;
    row.var_rel_err_pct = var_rel;
    row.mean_abs_err = mean_abs;
    row.ep_nonconverged = nonconverged;
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
    row.analytic_entropy = std::numeric_limits<double>::quiet_NaN();
    row.mean_rel_err_pct = std::numeric_limits<double>::quiet_NaN();
    row.var_rel_err_pct = std::numeric_limits<double>::quiet_NaN();
    row.mean_abs_err = std::numeric_limits<double>::quiet_NaN();
  }
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.rows.push_back(std::move(row));
}

inline DistributionSpec family_ramp(Family f, int d) {
  switch (f) {
    case Family::gaussian: return gaussian_sigma_ramp(d);
    case Family::gamma_product: return gamma_ramp(d);
    case Family::beta_product: return beta_ramp(d);
    default: throw std::invalid_argument("dim sweep supports gaussian/gamma/beta only");
  }
}

}  // namespace detail

/// Parameter-grid study over the fixed low-dimensional distributions:
/// every (N, k, p/N) triple, both estimators.
inline BenchResult run_grid(const ExperimentPlan& plan) {
  BenchResult out;
  for (const auto& spec : plan.specs)
    for (int n : plan.n_values)
      for (int k : plan.k_values)
        for (double pf : plan.p_frac_values) {
          const int p = detail::choose_p(pf, n, k, spec.dim);
          detail::run_cell("grid", spec, n, k, p, EntropyMethod::kl, plan, out);
          detail::run_cell("grid", spec, n, k, p, EntropyMethod::kpn, plan, out);
        }
  return out;
}

/// Dimension sweep of the parameter-ramp families at fixed N, k, p/N.
inline BenchResult run_dim_sweep(const ExperimentPlan& plan) {
  BenchResult out;
  for (Family f : plan.families)
    for (int d : plan.dim_values) {
      const DistributionSpec spec = detail::family_ramp(f, d);
      for (int n : plan.n_values)
        for (int k : plan.k_values)
          for (double pf : plan.p_frac_values) {
            const int p = detail::choose_p(pf, n, k, d);
            detail::run_cell("dims", spec, n, k, p, EntropyMethod::kl, plan, out);
            detail::run_cell("dims", spec, n, k, p, EntropyMethod::kpn, plan, out);
          }
    }
  return out;
}

/// Correlation study: Gaussian on a linear manifold observed at times
/// 1..m, for each joint dimension and noise level.
inline BenchResult run_manifold(const ExperimentPlan& plan) {
  BenchResult out;
  for (double noise : plan.noise_values)
    for (int d : plan.dim_values) {
      if (d < 2) throw std::invalid_argument("run_manifold: joint dimension must be >= 2");
      const DistributionSpec spec = linear_manifold(d - 1, noise);
      for (int n : plan.n_values)
        for (int k : plan.k_values)
          for (double pf : plan.p_frac_values) {
            const int p = detail::choose_p(pf, n, k, d);
            detail::run_cell("manifold", spec, n, k, p, EntropyMethod::kl, plan, out, noise);
            detail::run_cell("manifold", spec, n, k, p, EntropyMethod::kpn, plan, out, noise);
          }
    }
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "experiment,method,family,n,d,k,p,ensembles,analytic_entropy,mean_rel_err_pct,"
        "var_rel_err_pct,mean_abs_err,ep_nonconverged,wall_time_s\n";
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.method << ',' << r.family << ',' << r.n << ',' << r.d << ','
       << r.k << ',' << r.p << ',' << r.ensembles << ',' << format_double(r.analytic_entropy)
       << ',' << format_double(r.mean_rel_err_pct) << ',' << format_double(r.var_rel_err_pct)
       << ',' << format_double(r.mean_abs_err) << ',' << r.ep_nonconverged << ','
       << format_double(r.wall_time_s) << '\n';
  }
}

inline void write_raw_csv(std::ostream& os, const std::vector<RawRow>& raw) {
  os << "experiment,member,seed,estimate\n";
  for (const auto& r : raw)
    os << r.experiment << ',' << r.member << ',' << r.seed << ',' << format_double(r.estimate)
       << '\n';
}

}  // namespace kpn::bench

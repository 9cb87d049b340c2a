// Command-line front end: single entropy estimates from CSV samples,
// the benchmark campaigns, and a self-diagnostic suite.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kpn/kpn.hpp"

namespace {

void apply_thread_cap(int threads) {
#ifdef _OPENMP
  if (threads <= 0) {
    if (const char* env = std::getenv("ENTROPY_KPN_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

std::string report_text(const kpn::EntropyReport& r) {
  std::ostringstream os;
  os << "method:            " << kpn::method_name(r.method) << '\n'
     << "samples:           " << r.n << '\n'
     << "dimension:         " << r.d << '\n'
     << "k:                 " << r.k << '\n';
  if (r.method == kpn::EntropyMethod::kpn) os << "p:                 " << r.p << '\n';
  os << "estimate_nats:     " << kpn::bench::format_double(r.estimate) << '\n'
     << "term_psi:          " << kpn::bench::format_double(r.term_psi) << '\n';
  if (r.method == kpn::EntropyMethod::kl) {
    os << "term_log_volume:   " << kpn::bench::format_double(r.term_log_volume) << '\n'
       << "term_mean_log_eps: " << kpn::bench::format_double(r.term_mean_log_eps) << '\n';
  } else {
    os << "term_mean_log_g:   " << kpn::bench::format_double(r.term_mean_log_g) << '\n'
       << "term_mean_log_G:   " << kpn::bench::format_double(r.term_mean_log_mass) << '\n'
       << "ep_nonconverged:   " << r.ep_nonconverged << '\n';
  }
  return os.str();
}

nlohmann::json report_json(const kpn::EntropyReport& r) {
  nlohmann::json j{{"method", kpn::method_name(r.method)},
                   {"n", r.n},
                   {"d", r.d},
                   {"k", r.k},
                   {"estimate_nats", r.estimate},
                   {"term_psi", r.term_psi}};
  if (r.method == kpn::EntropyMethod::kl) {
    j["term_log_volume"] = r.term_log_volume;
    j["term_mean_log_eps"] = r.term_mean_log_eps;
  } else {
    j["p"] = r.p;
    j["term_mean_log_g"] = r.term_mean_log_g;
    j["term_mean_log_G"] = r.term_mean_log_mass;
    j["ep_nonconverged"] = r.ep_nonconverged;
  }
  return j;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << text;
}

int write_bench_outputs(const kpn::bench::BenchResult& res, const std::string& out_path,
                        const std::string& raw_path) {
  {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file " + out_path);
    kpn::bench::write_rows_csv(out, res.rows);
  }
  if (!raw_path.empty()) {
    std::ofstream out(raw_path);
    if (!out) throw std::runtime_error("cannot open output file " + raw_path);
    kpn::bench::write_raw_csv(out, res.raw);
  }
  for (const auto& r : res.rows)
    if (r.failed) std::cerr << "cell failed: " << r.experiment << ": " << r.error << '\n';
  return res.failed_cells() == 0 ? 0 : 1;
}

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

// Self-diagnostics: the digamma identity for exact ball masses, EP
// exactness on independent coordinates plus a quadrature cross-check,
// and the probability-mass error bound bracket on the 1-D Gaussian.
std::vector<Check> run_diagnostics() {
  std::vector<Check> checks;

  {
    // ensemble mean of log P_i against psi(k) - psi(N)
    const int n = 200, reps = 500;
    for (int k : {1, 3, 5}) {
      std::vector<double> means;
      means.reserve(reps);
      const kpn::DistributionSpec spec = kpn::standard_gaussian(1);
      for (int rep = 0; rep < reps; ++rep) {
        const kpn::SampleSet s = kpn::sample(spec, n, 1000 + rep);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const double eps = kpn::kth_distance(s, i, k);
          const double x = s.row(i)[0];
          const double mass =
              kpn::std_normal_cdf(x + eps) - kpn::std_normal_cdf(x - eps);
          acc += std::log(mass);
        }
        means.push_back(acc / n);
      }
      double mean = 0.0;
      for (double v : means) mean += v;
      mean /= reps;
      double var = 0.0;
      for (double v : means) var += (v - mean) * (v - mean);
      var /= (reps - 1);
      const double se = std::sqrt(var / reps);
      const double target = kpn::digamma(k) - kpn::digamma(n);
      const bool ok = std::abs(mean - target) <= 3.0 * se;
      std::ostringstream os;
      os << "k=" << k << " mean=" << mean << " target=" << target << " se=" << se;
      checks.push_back({"digamma identity (exact log P ensemble)", ok, os.str()});
    }
  }

  {
    // diagonal covariances: EP must match the product of Phi differences
    kpn::Rng rng(7);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int d = 1 + static_cast<int>(rng.uniform() * 20.0);
      kpn::GaussianModel g{std::vector<double>(d), kpn::SpdMatrix(d)};
      kpn::AxisAlignedBox box;
      box.center.resize(d);
      box.half_width = 0.2 + 2.0 * rng.uniform();
      double exact = 0.0;
      for (int j = 0; j < d; ++j) {
        g.mean[j] = 2.0 * rng.normal();
        const double sd = 0.3 + 2.0 * rng.uniform();
        g.cov.at(j, j) = sd * sd;
        box.center[j] = g.mean[j] + 1.5 * rng.normal();
        const double lo = (box.center[j] - box.half_width - g.mean[j]) / sd;
        const double hi = (box.center[j] + box.half_width - g.mean[j]) / sd;
        exact += std::log(kpn::std_normal_cdf(hi) - kpn::std_normal_cdf(lo));
      }
      const kpn::BoxMassResult r = kpn::gaussian_box_logmass(g, box);
      worst = std::max(worst, std::abs(r.log_mass - exact));
    }
    std::ostringstream os;
    os << "max |ep - exact| = " << worst;
    checks.push_back({"EP diagonal exactness (200 cases)", worst < 1e-10, os.str()});
  }

  {
    // correlated 2-D EP against tensor quadrature
    kpn::DistributionSpec spec = kpn::grid_gaussian_2d();
    kpn::GaussianModel g{spec.means, kpn::gaussian_covariance(spec)};
    kpn::AxisAlignedBox box{{0.0, 0.0}, 1.0};
    const kpn::BoxMassResult ep = kpn::gaussian_box_logmass(g, box);
    const double quad = kpn::probability_mass_quadrature(
        [&spec](std::span<const double> x) { return kpn::detail::pdf_value(spec, x); }, box);
    const double diff = std::abs(ep.log_mass - std::log(quad));
    std::ostringstream os;
    os << "|ep - quadrature| = " << diff << " in log mass";
    checks.push_back({"EP correlated 2-D vs quadrature", diff < 1e-3, os.str()});
  }

  {
    // probability-mass error bound bracket for the 1-D Gaussian
    const kpn::DistributionSpec spec = kpn::standard_gaussian(1);
    bool all_ok = true;
    std::ostringstream os;
    for (double x0 : {0.0, 2.0}) {
      for (double eps : {0.05, 0.1, 0.2}) {
        kpn::AxisAlignedBox box{{x0}, eps};
        const double mass = kpn::probability_mass_quadrature(
            [&spec](std::span<const double> x) { return kpn::detail::pdf_value(spec, x); }, box);
        const kpn::PdfHessian ph = kpn::analytic_pdf_and_hessian(spec, std::vector<double>{x0});
        const double mass_kl = 2.0 * eps * ph.density;
        const auto [lo, hi] = kpn::kl_mass_bounds(ph.lambda_min, ph.lambda_max, eps, 1);
        const double err = std::abs(mass - mass_kl);
        // 1% slack absorbs the higher-order Taylor remainder the bound ignores
        const bool ok = err >= lo * 0.99 && err <= hi * 1.01;
        all_ok = all_ok && ok;
        if (!ok) os << " [x=" << x0 << " eps=" << eps << " err=" << err << " not in (" << lo
                    << ", " << hi << ")]";
      }
    }
    if (all_ok) os << "all 6 cases bracketed";
    checks.push_back({"probability-mass error bound bracket", all_ok, os.str()});
  }

  return checks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kpN / Kozachenko-Leonenko entropy estimation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads (default: all cores)");

  // --- estimate ---
  auto* est = app.add_subcommand("estimate", "estimate entropy of a CSV sample matrix");
  std::string input_path, method = "kpn", format = "text", output_path;
  int k = 4, p = 0;
  est->add_option("input", input_path, "CSV file, rows = samples")->required();
  est->add_option("--method", method, "kl or kpn")->check(CLI::IsMember({"kl", "kpn"}));
  est->add_option("-k,--k", k, "ball neighbour order");
  est->add_option("-p,--p", p, "local Gaussian neighbour count (kpn)");
  est->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
  est->add_option("-o,--out", output_path, "write report here instead of stdout");

  // --- bench common flags ---
  std::string family = "gaussian";
  std::vector<int> dims;
  std::vector<int> n_values{10000};
  std::vector<int> k_values{4};
  std::vector<double> p_fracs{0.02};
  std::vector<double> noises{1e-1, 1e-3};
  int ensembles = 50;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_csv, raw_csv;

  auto add_bench_flags = [&](CLI::App* cmd, bool with_family, bool with_noise) {
    cmd->add_option("--n", n_values, "sample counts");
    cmd->add_option("--k", k_values, "ball neighbour orders");
    cmd->add_option("--p-frac", p_fracs, "p as a fraction of N");
    cmd->add_option("--ensembles", ensembles, "independent replicates per cell");
    cmd->add_option("--seed", seed, "base seed (member j uses seed+j)")
        ->required()
        ->each([&seed_set](const std::string&) { seed_set = true; });
    cmd->add_option("--out", out_csv, "output CSV path")->required();
    cmd->add_option("--raw-out", raw_csv, "optional per-member CSV path");
    if (with_family)
      cmd->add_option("--family", family, "gaussian, gamma or beta")
          ->check(CLI::IsMember({"gaussian", "gamma", "beta", "all"}));
    if (with_noise) cmd->add_option("--noise", noises, "noise variances");
    cmd->add_option("--dims", dims, "dimensions to sweep");
  };

  auto* grid = app.add_subcommand("bench-grid", "k/p/N grid study on the fixed distributions");
  add_bench_flags(grid, false, false);

  auto* dim_sweep = app.add_subcommand("bench-dims", "dimension sweep of the ramp families");
  add_bench_flags(dim_sweep, true, false);

  auto* manifold = app.add_subcommand("bench-manifold", "linear-manifold correlation study");
  add_bench_flags(manifold, false, true);

  auto* diag = app.add_subcommand("diagnostics", "run the self-check suite");

  CLI11_PARSE(app, argc, argv);
  apply_thread_cap(threads);

  try {
    if (est->parsed()) {
      const kpn::SampleSet s = kpn::read_sample_csv(input_path);
      kpn::EntropyReport rep;
      if (method == "kl") {
        rep = kpn::estimate_kl(s, k);
      } else {
        kpn::EstimatorConfig cfg;
        cfg.k = k;
        cfg.p = p > 0 ? p : std::min(s.size() - 1, std::max(2 * s.dim() + 2, 8 * k));
        rep = kpn::estimate_kpn(s, cfg);
      }
      if (format == "json") {
        write_output(report_json(rep).dump(2) + "\n", output_path);
      } else {
        write_output(report_text(rep), output_path);
      }
      return 0;
    }

    if (grid->parsed() || dim_sweep->parsed() || manifold->parsed()) {
      kpn::bench::ExperimentPlan plan;
      plan.n_values = n_values;
      plan.k_values = k_values;
      plan.p_frac_values = p_fracs;
      plan.ensembles = ensembles;
      plan.base_seed = seed;
      kpn::bench::BenchResult res;
      if (grid->parsed()) {
        plan.kind = kpn::bench::ExperimentKind::grid;
        plan.specs = {kpn::grid_gaussian_2d(), kpn::grid_gamma_3d(), kpn::grid_beta_4d()};
        if (n_values.empty()) plan.n_values = {8000};
        res = kpn::bench::run_grid(plan);
      } else if (dim_sweep->parsed()) {
        plan.kind = kpn::bench::ExperimentKind::dim_sweep;
        plan.dim_values = dims.empty() ? std::vector<int>{4, 8, 16, 40, 80} : dims;
        if (family == "all") {
          plan.families = {kpn::Family::gaussian, kpn::Family::gamma_product,
                           kpn::Family::beta_product};
        } else if (family == "gaussian") {
          plan.families = {kpn::Family::gaussian};
        } else if (family == "gamma") {
          plan.families = {kpn::Family::gamma_product};
        } else {
          plan.families = {kpn::Family::beta_product};
        }
        res = kpn::bench::run_dim_sweep(plan);
      } else {
        plan.kind = kpn::bench::ExperimentKind::manifold;
        plan.dim_values = dims.empty() ? std::vector<int>{2, 3, 4, 5, 6, 7, 8, 9, 10} : dims;
        plan.noise_values = noises;
        if (plan.n_values.empty()) plan.n_values = {5000};
        res = kpn::bench::run_manifold(plan);
      }
      return write_bench_outputs(res, out_csv, raw_csv);
    }

    if (diag->parsed()) {
      const std::vector<Check> checks = run_diagnostics();
      bool all_ok = true;
      for (const auto& c : checks) {
        std::cout << (c.ok ? "[ok]   " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
        all_ok = all_ok && c.ok;
      }
      return all_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

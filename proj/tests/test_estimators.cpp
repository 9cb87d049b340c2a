#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kpn/distributions.hpp"
#include "kpn/estimators.hpp"
#include "kpn/quadrature.hpp"

namespace {

kpn::SampleSet translated(const kpn::SampleSet& s, std::span<const double> shift) {
  std::vector<double> data(s.data().begin(), s.data().end());
  for (int i = 0; i < s.size(); ++i)
    for (int c = 0; c < s.dim(); ++c) data[static_cast<size_t>(i) * s.dim() + c] += shift[c];
  return kpn::SampleSet(s.size(), s.dim(), std::move(data));
}

kpn::SampleSet scaled(const kpn::SampleSet& s, double a) {
  std::vector<double> data(s.data().begin(), s.data().end());
  for (auto& v : data) v *= a;
  return kpn::SampleSet(s.size(), s.dim(), std::move(data));
}

}  // namespace

TEST_CASE("kl: two-sample hand evaluation") {
  const kpn::SampleSet s(2, 1, {0.0, 1.0});
  const auto r = kpn::estimate_kl(s, 1);
  REQUIRE(std::abs(r.estimate - (1.0 + std::log(2.0))) < 1e-12);
  REQUIRE(std::abs(r.term_psi - 1.0) < 1e-12);
  REQUIRE(r.estimate == r.term_psi + r.term_log_volume + r.term_mean_log_eps);
}

TEST_CASE("kl: duplicate samples are an error naming the rows") {
  const kpn::SampleSet s(3, 1, {0.0, 0.0, 1.0});
  try {
    kpn::estimate_kl(s, 1);
    FAIL("expected duplicate error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("duplicate") != std::string::npos);
    REQUIRE(msg.find('0') != std::string::npos);
    REQUIRE(msg.find('1') != std::string::npos);
  }
}

TEST_CASE("kl: 1-D gaussian sanity against the analytic entropy") {
  const double h_true = 1.4189385332046727;
  double mean = 0.0;
  const int seeds = 10;
  for (int rep = 0; rep < seeds; ++rep) {
    const auto s = kpn::sample(kpn::standard_gaussian(1), 10000, 500 + rep);
    mean += kpn::estimate_kl(s, 4).estimate;
  }
  mean /= seeds;
  REQUIRE(std::abs(mean - h_true) < 0.05);
}

TEST_CASE("kpn: translation leaves the estimate unchanged") {
  const auto s = kpn::sample(kpn::gaussian_sigma_ramp(2), 800, 31);
  kpn::EstimatorConfig cfg{4, 40, 1e-12, 1e-4};
  const double base = kpn::estimate_kpn(s, cfg).estimate;
  const std::vector<double> shift{17.25, -3.5};
  const double moved = kpn::estimate_kpn(translated(s, shift), cfg).estimate;
  REQUIRE(std::abs(moved - base) < 1e-9);

  const double kl_base = kpn::estimate_kl(s, 4).estimate;
  const double kl_moved = kpn::estimate_kl(translated(s, shift), 4).estimate;
  REQUIRE(std::abs(kl_moved - kl_base) < 1e-9);
}

TEST_CASE("kpn and kl: isotropic scaling adds d log a") {
  const int d = 2;
  const auto s = kpn::sample(kpn::standard_gaussian(d), 1000, 77);
  const double a = 2.0;
  kpn::EstimatorConfig cfg{4, 50, 1e-12, 1e-4};
  const double base = kpn::estimate_kpn(s, cfg).estimate;
  const double big = kpn::estimate_kpn(scaled(s, a), cfg).estimate;
  REQUIRE(std::abs(big - base - d * std::log(a)) < 1e-9);

  const double kl_base = kpn::estimate_kl(s, 4).estimate;
  const double kl_big = kpn::estimate_kl(scaled(s, a), 4).estimate;
  REQUIRE(std::abs(kl_big - kl_base - d * std::log(a)) < 1e-9);
}

TEST_CASE("estimators: permutation invariance over rows and coordinates") {
  const int n = 400, d = 3;
  const auto s = kpn::sample(kpn::gaussian_sigma_ramp(d), n, 13);
  kpn::EstimatorConfig cfg{3, 25, 1e-12, 1e-4};
  const double kpn_base = kpn::estimate_kpn(s, cfg).estimate;
  const double kl_base = kpn::estimate_kl(s, 3).estimate;

  std::vector<int> row_perm(n);
  std::iota(row_perm.begin(), row_perm.end(), 0);
  std::mt19937_64 gen(14);
  std::shuffle(row_perm.begin(), row_perm.end(), gen);
  std::vector<int> col_perm{2, 0, 1};

  std::vector<double> data(static_cast<size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    const auto row = s.row(row_perm[i]);
    for (int c = 0; c < d; ++c) data[static_cast<size_t>(i) * d + c] = row[col_perm[c]];
  }
  const kpn::SampleSet permuted(n, d, std::move(data));

  REQUIRE(std::abs(kpn::estimate_kpn(permuted, cfg).estimate - kpn_base) < 1e-12);
  REQUIRE(std::abs(kpn::estimate_kl(permuted, 3).estimate - kl_base) < 1e-12);
}

TEST_CASE("estimators: reports decompose exactly and echo the config") {
  const auto s = kpn::sample(kpn::standard_gaussian(2), 300, 3);
  kpn::EstimatorConfig cfg{2, 20, 1e-12, 1e-4};
  const auto r = kpn::estimate_kpn(s, cfg);
  REQUIRE(r.estimate == r.term_psi + r.term_mean_log_g + r.term_mean_log_mass);
  REQUIRE(r.n == 300);
  REQUIRE(r.d == 2);
  REQUIRE(r.k == 2);
  REQUIRE(r.p == 20);
  REQUIRE(r.jitter_start == 1e-12);

  const auto rk = kpn::estimate_kl(s, 2);
  REQUIRE(rk.estimate == rk.term_psi + rk.term_log_volume + rk.term_mean_log_eps);
  REQUIRE(rk.term_psi == r.term_psi);  // shared psi(N) - psi(k) term
}

TEST_CASE("estimators: kl and kpn agree on locally flat densities") {
  // 1-D uniform; both should sit near the true entropy 0
  kpn::DistributionSpec uniform;
  uniform.family = kpn::Family::beta_product;
  uniform.dim = 1;
  uniform.alphas = {1.0};
  uniform.betas = {1.0};
  const auto s = kpn::sample(uniform, 5000, 2024);
  kpn::EstimatorConfig cfg{4, 4, 1e-12, 1e-4};
  const double h_kpn = kpn::estimate_kpn(s, cfg).estimate;
  const double h_kl = kpn::estimate_kl(s, 4).estimate;
  REQUIRE(std::abs(h_kpn - h_kl) < 0.1);
}

TEST_CASE("kpn: duplicates and invalid config are rejected") {
  const kpn::SampleSet dup(4, 1, {0.5, 0.5, 1.0, 2.0});
  kpn::EstimatorConfig cfg{1, 2, 1e-12, 1e-4};
  REQUIRE_THROWS_AS(kpn::estimate_kpn(dup, cfg), std::runtime_error);

  const kpn::SampleSet ok(4, 1, {0.0, 1.0, 2.0, 4.0});
  kpn::EstimatorConfig bad{3, 2, 1e-12, 1e-4};  // k > p
  REQUIRE_THROWS_AS(kpn::estimate_kpn(ok, bad), std::invalid_argument);
  kpn::EstimatorConfig big{1, 4, 1e-12, 1e-4};  // p > n-1
  REQUIRE_THROWS_AS(kpn::estimate_kpn(ok, big), std::invalid_argument);
}

TEST_CASE("kpn: neighborhood summaries satisfy their bounds") {
  const auto s = kpn::sample(kpn::gaussian_sigma_ramp(3), 250, 8);
  kpn::EstimatorConfig cfg{3, 30, 1e-12, 1e-4};
  for (int i = 0; i < s.size(); i += 17) {
    const auto ns = kpn::summarize_neighborhood(s, i, cfg);
    REQUIRE(ns.eps > 0.0);
    REQUIRE(static_cast<int>(ns.neighbor_indices.size()) == cfg.p);
    REQUIRE(ns.log_g_at_xi <= 0.0);
    // the unit-peak gaussian mass cannot exceed the box volume
    REQUIRE(ns.log_g_mass <= s.dim() * std::log(2.0 * ns.eps) + 1e-9);
    for (int idx : ns.neighbor_indices) REQUIRE(idx != i);
  }
}

TEST_CASE("kpn: collinear samples exhaust jitter and name the sample") {
  // y exactly equals 2x, so every local covariance is singular; with a
  // tiny jitter ceiling the estimator must fail loudly
  const int n = 60;
  std::vector<double> data;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const double x = u(gen);
    data.push_back(x);
    data.push_back(2.0 * x);
  }
  const kpn::SampleSet s(n, 2, std::move(data));
  kpn::EstimatorConfig cfg{2, 10, 1e-300, 1e-280};
  try {
    kpn::estimate_kpn(s, cfg);
    FAIL("expected jitter exhaustion");
  } catch (const std::runtime_error& e) {
    REQUIRE(std::string(e.what()).find("sample") != std::string::npos);
  }
  // the default jitter ceiling handles the same data
  kpn::EstimatorConfig workable{2, 10, 1e-12, 1e-4};
  REQUIRE_NOTHROW(kpn::estimate_kpn(s, workable));
}

TEST_CASE("kpn: short 2-D correlated gaussian stays within ten percent") {
  const auto s = kpn::sample(kpn::grid_gaussian_2d(), 4000, 99);
  kpn::EstimatorConfig cfg{4, 80, 1e-12, 1e-4};
  const double h = kpn::estimate_kpn(s, cfg).estimate;
  const double h_true = kpn::analytic_entropy(kpn::grid_gaussian_2d());
  REQUIRE(std::abs(h - h_true) / h_true < 0.10);
}

TEST_CASE("quadrature: uniform, gaussian, and correlated masses") {
  kpn::AxisAlignedBox half{{0.5}, 0.25};
  const double uniform_mass =
      kpn::probability_mass_quadrature([](std::span<const double>) { return 1.0; }, half);
  REQUIRE(std::abs(uniform_mass - 0.5) < 1e-12);

  const auto spec1 = kpn::standard_gaussian(1);
  kpn::AxisAlignedBox sym{{0.0}, 1.0};
  const double normal_mass = kpn::probability_mass_quadrature(
      [&spec1](std::span<const double> x) { return kpn::detail::pdf_value(spec1, x); }, sym);
  REQUIRE(std::abs(normal_mass - 0.6826894921370859) < 1e-10);

  const auto spec2 = kpn::grid_gaussian_2d();
  kpn::AxisAlignedBox box2{{0.2, -0.3}, 0.8};
  const double quad_mass = kpn::probability_mass_quadrature(
      [&spec2](std::span<const double> x) { return kpn::detail::pdf_value(spec2, x); }, box2);
  kpn::GaussianModel g{spec2.means, kpn::gaussian_covariance(spec2)};
  const std::int64_t n = 400000;
  const double mc = std::exp(kpn::gaussian_box_logmass_mc(g, box2, n, 17));
  const double se = std::sqrt(mc * (1.0 - mc) / n);
  REQUIRE(std::abs(quad_mass - mc) < 4.0 * se);

  kpn::AxisAlignedBox too_big{{0.0, 0.0, 0.0, 0.0}, 1.0};
  REQUIRE_THROWS_AS(
      kpn::probability_mass_quadrature([](std::span<const double>) { return 1.0; }, too_big),
      std::invalid_argument);
}

TEST_CASE("kl_mass_bounds: closed forms and the gaussian bracket") {
  const auto zero = kpn::kl_mass_bounds(0.0, 0.0, 0.3, 4);
  REQUIRE(zero.first == 0.0);
  REQUIRE(zero.second == 0.0);

  const auto one_d = kpn::kl_mass_bounds(0.2, 1.0, 0.1, 1);
  REQUIRE(std::abs(one_d.second - 1.0 / 3.0 * 1e-3) < 1e-18);
  REQUIRE(std::abs(one_d.first - 0.2 / 3.0 * 1e-3) < 1e-18);

  // |P - P_KL| bracketed by the Hessian eigenvalue bounds (1% slack for
  // the higher-order Taylor remainder the bound drops)
  const auto spec = kpn::standard_gaussian(1);
  for (double x0 : {0.0, 2.0}) {
    for (double eps : {0.05, 0.1, 0.2}) {
      kpn::AxisAlignedBox box{{x0}, eps};
      const double mass = kpn::probability_mass_quadrature(
          [&spec](std::span<const double> x) { return kpn::detail::pdf_value(spec, x); }, box);
      const auto ph = kpn::analytic_pdf_and_hessian(spec, std::vector<double>{x0});
      const double err = std::abs(mass - 2.0 * eps * ph.density);
      const auto [lo, hi] = kpn::kl_mass_bounds(ph.lambda_min, ph.lambda_max, eps, 1);
      REQUIRE(err >= lo * 0.99);
      REQUIRE(err <= hi * 1.01);
    }
  }
}

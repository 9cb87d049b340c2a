#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "kpn/bench.hpp"

namespace {

kpn::bench::ExperimentPlan tiny_sweep_plan(int ensembles = 3) {
  kpn::bench::ExperimentPlan plan;
  plan.kind = kpn::bench::ExperimentKind::dim_sweep;
  plan.families = {kpn::Family::gaussian};
  plan.dim_values = {2, 3};
  plan.n_values = {300};
  plan.k_values = {3};
  plan.p_frac_values = {0.05};
  plan.ensembles = ensembles;
  plan.base_seed = 11;
  return plan;
}

// CSV text with the wall-time column blanked; timings are the one field
// that legitimately varies between identical runs
std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << line.substr(0, pos) << '\n';
  }
  return out.str();
}

std::string rows_to_csv(const std::vector<kpn::bench::ResultRow>& rows) {
  std::ostringstream os;
  kpn::bench::write_rows_csv(os, rows);
  return os.str();
}

}  // namespace

TEST_CASE("bench: identical plans give identical results") {
  const auto a = kpn::bench::run_dim_sweep(tiny_sweep_plan());
  const auto b = kpn::bench::run_dim_sweep(tiny_sweep_plan());
  REQUIRE(a.rows.size() == b.rows.size());
  REQUIRE(strip_wall_time(rows_to_csv(a.rows)) == strip_wall_time(rows_to_csv(b.rows)));
  REQUIRE(a.raw.size() == b.raw.size());
  for (size_t i = 0; i < a.raw.size(); ++i) REQUIRE(a.raw[i].estimate == b.raw[i].estimate);
}

TEST_CASE("bench: shrinking the ensemble keeps the leading members") {
  const auto big = kpn::bench::run_dim_sweep(tiny_sweep_plan(6));
  const auto small = kpn::bench::run_dim_sweep(tiny_sweep_plan(3));
  // raw rows are ordered cell by cell, member by member
  size_t bi = 0, si = 0;
  for (const auto& row : small.rows) {
    (void)row;
    for (int j = 0; j < 3; ++j, ++si, ++bi) {
      REQUIRE(small.raw[si].member == big.raw[bi].member);
      REQUIRE(small.raw[si].seed == big.raw[bi].seed);
      REQUIRE(small.raw[si].estimate == big.raw[bi].estimate);
    }
    bi += 3;  // skip members 3..5 of the bigger run
  }
}

TEST_CASE("bench: csv schema is pinned") {
  const auto res = kpn::bench::run_dim_sweep(tiny_sweep_plan());
  const std::string csv = rows_to_csv(res.rows);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  REQUIRE(header ==
          "experiment,method,family,n,d,k,p,ensembles,analytic_entropy,mean_rel_err_pct,"
          "var_rel_err_pct,mean_abs_err,ep_nonconverged,wall_time_s");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    REQUIRE(std::count(line.begin(), line.end(), ',') == 13);
  }
  REQUIRE(rows == 4);  // 2 dims x 2 methods

  std::ostringstream raw_os;
  kpn::bench::write_raw_csv(raw_os, res.raw);
  std::istringstream raw_in(raw_os.str());
  std::getline(raw_in, header);
  REQUIRE(header == "experiment,member,seed,estimate");
}

TEST_CASE("bench: aggregates are recomputable from the raw members") {
  const auto res = kpn::bench::run_dim_sweep(tiny_sweep_plan());
  for (const auto& row : res.rows) {
    double mean_rel = 0.0, mean_abs = 0.0;
    int count = 0;
    for (const auto& raw : res.raw) {
      if (raw.experiment != row.experiment) continue;
      mean_rel += 100.0 * std::abs(row.analytic_entropy - raw.estimate) / row.analytic_entropy;
      mean_abs += std::abs(row.analytic_entropy - raw.estimate);
      ++count;
    }
    REQUIRE(count == row.ensembles);
    REQUIRE(std::abs(mean_rel / count - row.mean_rel_err_pct) < 1e-12);
    REQUIRE(std::abs(mean_abs / count - row.mean_abs_err) < 1e-12);
  }
}

TEST_CASE("bench: a failing cell is recorded, the run continues") {
  kpn::bench::ExperimentPlan plan = tiny_sweep_plan();
  plan.k_values = {299, 3};  // k = n-1 forces p > n-1 in the kpn cell
  const auto res = kpn::bench::run_dim_sweep(plan);
  REQUIRE(res.failed_cells() > 0);
  bool saw_failure = false, saw_success = false;
  for (const auto& row : res.rows) {
    if (row.failed) {
      saw_failure = true;
      REQUIRE(std::isnan(row.mean_rel_err_pct));
      REQUIRE_FALSE(row.error.empty());
    } else {
      saw_success = true;
    }
  }
  REQUIRE(saw_failure);
  REQUIRE(saw_success);
}

TEST_CASE("bench: p floors at max(k, d+2)") {
  kpn::bench::ExperimentPlan plan = tiny_sweep_plan();
  plan.p_frac_values = {0.001};  // round(0.3) would collapse to 0
  const auto res = kpn::bench::run_dim_sweep(plan);
  for (const auto& row : res.rows) REQUIRE(row.p >= std::max(row.k, row.d + 2));
}

TEST_CASE("bench: grid and manifold cell layout") {
  kpn::bench::ExperimentPlan plan;
  plan.kind = kpn::bench::ExperimentKind::grid;
  plan.specs = {kpn::grid_gaussian_2d()};
  plan.n_values = {250};
  plan.k_values = {2, 3};
  plan.p_frac_values = {0.05};
  plan.ensembles = 2;
  plan.base_seed = 5;
  const auto grid = kpn::bench::run_grid(plan);
  REQUIRE(grid.rows.size() == 4);  // 2 k-values x 2 methods
  REQUIRE(grid.failed_cells() == 0);

  kpn::bench::ExperimentPlan mplan;
  mplan.kind = kpn::bench::ExperimentKind::manifold;
  mplan.dim_values = {2, 3};
  mplan.noise_values = {1e-1};
  mplan.n_values = {250};
  mplan.k_values = {3};
  mplan.p_frac_values = {0.05};
  mplan.ensembles = 2;
  mplan.base_seed = 6;
  const auto man = kpn::bench::run_manifold(mplan);
  REQUIRE(man.rows.size() == 4);
  for (const auto& row : man.rows) {
    REQUIRE((row.d == 2 || row.d == 3));
    REQUIRE(row.family == std::string("manifold"));
    REQUIRE_FALSE(row.failed);
  }
}

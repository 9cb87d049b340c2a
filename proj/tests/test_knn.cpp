#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "kpn/knn.hpp"
#include "oracles.hpp"

namespace {

kpn::SampleSet make_set(const std::vector<std::vector<double>>& rows) {
  std::vector<double> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return kpn::SampleSet(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()),
                        std::move(data));
}

kpn::SampleSet random_set(int n, int d, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> data(static_cast<size_t>(n) * d);
  for (auto& v : data) v = nd(gen);
  return kpn::SampleSet(n, d, std::move(data));
}

}  // namespace

TEST_CASE("knn: 1-D hand cases") {
  const auto s = make_set({{0.0}, {1.0}, {2.0}, {4.0}});
  const auto nb = kpn::knn_query(s, 0, 2);
  REQUIRE(nb.indices == std::vector<int>{1, 2});
  REQUIRE(nb.distances == std::vector<double>{1.0, 2.0});

  REQUIRE(kpn::kth_distance(s, 0, 1) == 1.0);
  REQUIRE(kpn::kth_distance(s, 3, 2) == 3.0);
}

TEST_CASE("knn: max norm in 2-D") {
  const auto s = make_set({{0.0, 0.0}, {1.0, 0.5}, {3.0, 3.0}});
  const auto nb = kpn::knn_query(s, 0, 1);
  REQUIRE(nb.indices == std::vector<int>{1});
  REQUIRE(nb.distances == std::vector<double>{1.0});
}

TEST_CASE("knn: brute-force equivalence") {
  for (const auto& [n, d, seed] : std::vector<std::tuple<int, int, unsigned>>{
           {200, 5, 1}, {500, 1, 2}, {500, 8, 3}, {120, 2, 4}}) {
    const auto s = random_set(n, d, seed);
    std::mt19937_64 pick(seed + 100);
    for (int t = 0; t < 25; ++t) {
      const int i = static_cast<int>(pick() % n);
      const int m = 1 + static_cast<int>(pick() % (n > 20 ? 20 : n - 1));
      const auto got = kpn::knn_query(s, i, m);
      const auto [idx, dst] = oracle::brute_force_knn(s, i, m);
      REQUIRE(got.indices == idx);
      REQUIRE(got.distances == dst);
    }
  }
}

TEST_CASE("knn: kth distance nondecreasing in k") {
  const auto s = random_set(120, 3, 9);
  for (int i : {0, 17, 119}) {
    double prev = 0.0;
    for (int k = 1; k <= 30; ++k) {
      const double cur = kpn::kth_distance(s, i, k);
      REQUIRE(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("knn: row permutation permutes results consistently") {
  const int n = 80, d = 4;
  const auto s = random_set(n, d, 21);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 gen(22);
  std::shuffle(perm.begin(), perm.end(), gen);

  std::vector<double> data(static_cast<size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    const auto row = s.row(perm[i]);
    std::copy(row.begin(), row.end(), data.begin() + static_cast<size_t>(i) * d);
  }
  const kpn::SampleSet shuffled(n, d, std::move(data));

  std::vector<int> inverse(n);
  for (int i = 0; i < n; ++i) inverse[perm[i]] = i;

  for (int orig : {3, 40, 77}) {
    const auto a = kpn::knn_query(s, orig, 12);
    const auto b = kpn::knn_query(shuffled, inverse[orig], 12);
    REQUIRE(a.distances == b.distances);
    for (int t = 0; t < 12; ++t) REQUIRE(inverse[a.indices[t]] == b.indices[t]);
  }
}

TEST_CASE("knn: duplicate points are reported, not rejected") {
  const auto s = make_set({{0.0}, {0.0}, {1.0}});
  const auto nb = kpn::knn_query(s, 0, 2);
  REQUIRE(nb.distances == std::vector<double>{0.0, 1.0});
  REQUIRE(nb.indices == std::vector<int>{1, 2});
}

TEST_CASE("knn: parameter errors") {
  const auto s = make_set({{0.0}, {1.0}, {2.0}});
  REQUIRE_THROWS_AS(kpn::knn_query(s, 0, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(kpn::knn_query(s, 0, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(kpn::knn_query(s, 5, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(kpn::kth_distance(s, -1, 1), std::invalid_argument);
}

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "xfield/error.hpp"
#include "xfield/pathsampler.hpp"

using namespace xfield;

namespace {

PathTable toy_table() {
  PathTable t;
  t.beta_grid = {0.0, 0.5, 1.0, 1.5, 2.0};
  t.expected_stat = {1.0, 1.6, 2.9, 3.5, 3.8};
  return t;
}

double sd_of(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

}  // namespace

TEST_CASE("default grid has 41 points at step 0.05") {
  const auto g = make_beta_grid(2.0, 0.05);
  REQUIRE(g.size() == 41);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(2.0).epsilon(1e-15));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(0.05 * i).epsilon(1e-14));
  CHECK(make_beta_grid(2.0, 0.1).size() == 21);
}

TEST_CASE("isotonic regression") {
  CHECK(isotonic_nondecreasing(std::vector<double>{3, 1, 2}) == std::vector<double>{2, 2, 2});
  CHECK(isotonic_nondecreasing(std::vector<double>{1, 3, 2, 4}) == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK(isotonic_nondecreasing(std::vector<double>{1, 2, 3}) == std::vector<double>{1, 2, 3});
  CHECK(isotonic_nondecreasing(std::vector<double>{}).empty());

  // Against brute force: the fit must be monotone, preserve the sum, and
  // have no larger squared error than any monotone candidate from a
  // coarse search.
  Rng rng(1);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> v(6);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.3 * i + noise(rng);
    const auto fit = isotonic_nondecreasing(v);
    CHECK(std::is_sorted(fit.begin(), fit.end()));
    CHECK(std::accumulate(fit.begin(), fit.end(), 0.0) == doctest::Approx(std::accumulate(v.begin(), v.end(), 0.0)));
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) err += (fit[i] - v[i]) * (fit[i] - v[i]);
    auto candidate = v;
    std::sort(candidate.begin(), candidate.end());
    double sorted_err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sorted_err += (candidate[i] - v[i]) * (candidate[i] - v[i]);
    CHECK(err <= sorted_err + 1e-12);
  }
}

TEST_CASE("interpolation is exact at grid points and refuses to extrapolate") {
  const auto t = toy_table();
  for (std::size_t g = 0; g < t.beta_grid.size(); ++g) CHECK(t.interpolate(t.beta_grid[g]) == t.expected_stat[g]);
  CHECK(t.interpolate(0.25) == doctest::Approx(1.3));
  CHECK(t.interpolate(1.75) == doctest::Approx(3.65));
  CHECK_THROWS_AS(t.interpolate(-0.01), ExtrapolationError);
  CHECK_THROWS_AS(t.interpolate(2.01), ExtrapolationError);
  CHECK_THROWS_AS(log_ratio_normalising(t, 0.5, 2.5), ExtrapolationError);
}

TEST_CASE("table validation") {
  PathTable t = toy_table();
  t.beta_grid[0] = 0.1;
  CHECK_THROWS_AS(t.validate(), InvalidConfig);
  t = toy_table();
  t.beta_grid[2] = 0.5;
  CHECK_THROWS_AS(t.validate(), InvalidConfig);
  t = toy_table();
  t.expected_stat.pop_back();
  CHECK_THROWS_AS(t.validate(), InvalidConfig);
  CHECK_THROWS_AS(calibrate(LatticeSpec::make({2, 2}), 2, {}, 10, 2, 1), InvalidConfig);
  CHECK_THROWS_AS(calibrate(LatticeSpec::make({2, 2}), 2, {0.0, 1.0}, 10, 10, 1), InvalidConfig);
}

TEST_CASE("log ratio: zero on the diagonal, antisymmetric, additive") {
  const auto t = toy_table();
  CHECK(log_ratio_normalising(t, 0.7, 0.7) == 0.0);
  const double pts[] = {0.0, 0.13, 0.5, 0.77, 1.2, 1.99, 2.0};
  for (double a : pts)
    for (double b : pts) {
      CHECK(log_ratio_normalising(t, a, b) == doctest::Approx(-log_ratio_normalising(t, b, a)).epsilon(1e-14));
      for (double c : pts)
        CHECK(std::abs(log_ratio_normalising(t, a, c) -
                       (log_ratio_normalising(t, a, b) + log_ratio_normalising(t, b, c))) < 1e-12);
    }
  // Hand-computed trapezoid: integral 0..1 = 0.25*(1+1.6) + 0.25*(1.6+2.9) = 1.775.
  CHECK(log_ratio_normalising(t, 0.0, 1.0) == doctest::Approx(-1.775).epsilon(1e-14));
  CHECK(log_ratio_normalising(t, 1.0, 0.0) == doctest::Approx(1.775).epsilon(1e-14));
}

TEST_CASE("calibration at beta zero matches independent labels") {
  // With uniform independent labels the like-indicators of edges are
  // pairwise independent, so Var S = |E| (1/k)(1 - 1/k).
  const auto spec = LatticeSpec::make({6, 5});
  const std::size_t edges = 5 * 5 + 6 * 4;
  const int k = 3;
  const std::size_t sweeps = 4000, burnin = 100;
  const auto t = calibrate(spec, k, {0.0, 2.0}, sweeps, burnin, 17);
  const double se = std::sqrt(edges * (1.0 / k) * (1.0 - 1.0 / k) / (sweeps - burnin));
  CHECK(std::abs(t.expected_stat[0] - static_cast<double>(edges) / k) < 3.0 * se);
}

TEST_CASE("calibration at large beta approaches the edge count") {
  const auto t = calibrate(LatticeSpec::make({3, 3}), 2, {0.0, 2.0, 5.0}, 3000, 200, 5);
  CHECK(t.expected_stat[1] > 0.85 * 12);
  CHECK(t.expected_stat[2] > 0.99 * 12);
  CHECK(std::is_sorted(t.expected_stat.begin(), t.expected_stat.end()));
}

TEST_CASE("calibration on 2x2 agrees with the enumerated expectation") {
  const double exact = oracle::expected_stat(2, 2, 2, 0.5);
  std::vector<double> est;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    est.push_back(calibrate(LatticeSpec::make({2, 2}), 2, {0.0, 0.5}, 2200, 200, seed).expected_stat[1]);
  // Standard error of one replicate, measured across replicates.
  const double se = sd_of(est);
  for (double e : est) CHECK(std::abs(e - exact) < 3.0 * se + 1e-12);
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / est.size();
  CHECK(std::abs(mean - exact) < 3.0 * se / std::sqrt(est.size()));
}

TEST_CASE("path-sampling log normaliser ratio matches enumeration") {
  for (auto [nx, ny, k] : {std::tuple{2, 2, 2}, std::tuple{2, 3, 3}}) {
    const auto spec = LatticeSpec::make({std::size_t(nx), std::size_t(ny)});
    const auto t = calibrate(spec, k, make_beta_grid(2.0, 0.05), 20000, 200, 3);
    const double exact = oracle::log_normaliser(nx, ny, k, 0.0) - oracle::log_normaliser(nx, ny, k, 1.0);
    CHECK(std::abs(log_ratio_normalising(t, 0.0, 1.0) - exact) < 0.05);
  }
}

TEST_CASE("calibration is independent of the worker count") {
  const auto spec = LatticeSpec::make({5, 4});
  const auto grid = make_beta_grid(1.0, 0.1);
  const auto a = calibrate(spec, 3, grid, 300, 50, 9, 1);
  const auto b = calibrate(spec, 3, grid, 300, 50, 9, 4);
  CHECK(a == b);
  const auto c = calibrate(spec, 3, grid, 300, 50, 10, 1);
  CHECK_FALSE(a == c);
}

TEST_CASE("update_beta edge cases") {
  const auto t = toy_table();
  const BetaPrior prior{0.0, 2.0};
  Rng rng(4);
  SUBCASE("proposals outside the prior are rejected") {
    int moved = 0;
    for (int i = 0; i < 2000; ++i) {
      const auto u = update_beta(0.0, 0, t, prior, 1.0, rng);
      CHECK(u.beta >= 0.0);
      if (u.beta != 0.0) ++moved;
      CHECK(u.accepted == (u.beta != 0.0));
    }
    CHECK(moved < 2000);
  }
  SUBCASE("a degenerate proposal is always accepted") {
    for (int i = 0; i < 200; ++i) {
      const auto u = update_beta(1.0, 2, t, prior, 1e-300, rng);
      CHECK(u.accepted);
      CHECK(u.beta == 1.0);
    }
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(update_beta(1.0, 2, t, prior, 0.0, rng), InvalidConfig);
    CHECK_THROWS_AS(update_beta(1.0, 2, t, prior, -1.0, rng), InvalidConfig);
    CHECK_THROWS_AS(update_beta(2.5, 2, t, prior, 0.1, rng), DomainError);
  }
  SUBCASE("decisions are reproducible from the stream") {
    Rng a(77), b(77);
    double ba = 1.0, bb = 1.0;
    for (int i = 0; i < 500; ++i) {
      ba = update_beta(ba, 3, t, prior, 0.3, a).beta;
      bb = update_beta(bb, 3, t, prior, 0.3, b).beta;
      CHECK(ba == bb);
    }
  }
}

TEST_CASE("proposal tuner doubles, halves and freezes") {
  ProposalTuner t(0.01, 10, 0.2, 0.6);
  for (int i = 0; i < 10; ++i) t.record(true);
  CHECK(t.sd() == doctest::Approx(0.02));
  for (int i = 0; i < 10; ++i) t.record(false);
  CHECK(t.sd() == doctest::Approx(0.01));
  for (int i = 0; i < 10; ++i) t.record(i < 4);
  CHECK(t.sd() == doctest::Approx(0.01));
  t.freeze();
  for (int i = 0; i < 50; ++i) t.record(true);
  CHECK(t.sd() == doctest::Approx(0.01));
  CHECK(t.frozen());
}

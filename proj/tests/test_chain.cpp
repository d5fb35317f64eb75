#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "persist/chain.hpp"
#include "persist/errors.hpp"

using namespace persist;

namespace {
const ChainParams kGauss{0.5, Gaussian{}};
}

TEST_CASE("a outside (0,1) is rejected") {
  CHECK_THROWS_WITH_AS(validate(ChainParams{1.2, Gaussian{}}), "a must lie in (0,1)", Error);
  CHECK_THROWS_AS(validate(ChainParams{0.0, Gaussian{}}), Error);
}

TEST_CASE("no negative innovations: never killed") {
  const ChainParams p{0.5, Uniform{0.0, 1.0}};
  for (long horizon : {1L, 10L, 500L}) {
    RandomStream s(horizon);
    const auto [traj, rec] = simulate_to_stop(p, 0.3, horizon, s);
    CHECK(rec.censored);
    CHECK_FALSE(rec.t0.has_value());
    CHECK(traj.path.size() == static_cast<std::size_t>(horizon + 1));
  }
}

TEST_CASE("path follows the recursion exactly") {
  RandomStream s(11), replay(11);
  const auto [traj, rec] = simulate_to_stop(kGauss, 3.0, 200, s, 1.0);
  REQUIRE(traj.innovations_used == traj.path.size() - 1);
  for (std::size_t k = 1; k < traj.path.size(); ++k)
    CHECK(traj.path[k] == kGauss.a * traj.path[k - 1] + sample(kGauss.innovation, replay));
  if (rec.t0 && rec.t_r) CHECK(*rec.t0 >= *rec.t_r);
  CHECK(rec.censored == !rec.t0.has_value());
}

TEST_CASE("stopping records agree with the path") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomStream s(seed);
    const double r = 0.8;
    const auto [traj, rec] = simulate_to_stop(kGauss, 2.0, 100, s, r);
    const auto& x = traj.path;
    auto first = [&](auto pred) -> std::optional<long> {
      for (std::size_t k = 1; k < x.size(); ++k)
        if (pred(x[k])) return static_cast<long>(k);
      return std::nullopt;
    };
    CHECK(rec.t0 == first([](double v) { return v <= 0.0; }));
    CHECK(rec.t_r == first([&](double v) { return v <= r; }));
    CHECK(rec.sigma_r == first([&](double v) { return v > r; }));
    if (rec.t0) CHECK(*rec.t0 >= *rec.t_r);
  }
}

TEST_CASE("shift reduction: T_r equals T_0 of the shifted chain") {
  const double a = 0.6, r = 1.5, mu = 0.2;
  const ChainParams p{a, Gaussian{mu, 1.0}};
  const ChainParams shifted{a, Gaussian{mu - (1.0 - a) * r, 1.0}};
  int mismatches = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    RandomStream s1(seed), s2(seed);
    const auto rec = simulate_to_stop(p, 4.0, 400, s1, r).second;
    const auto rec_shift = simulate_to_stop(shifted, 4.0 - r, 400, s2).second;
    mismatches += rec.t_r != rec_shift.t0;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("monotone coupling with shared innovations") {
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    RandomStream s1(seed), s2(seed);
    const auto [lo, rec_lo] = simulate_to_stop(kGauss, 1.0, 300, s1);
    const auto [hi, rec_hi] = simulate_to_stop(kGauss, 2.0, 300, s2);
    REQUIRE(rec_lo.t0.has_value());
    if (rec_hi.t0) CHECK(*rec_lo.t0 <= *rec_hi.t0);
    for (std::size_t k = 0; k < std::min(lo.path.size(), hi.path.size()); ++k) CHECK(lo.path[k] <= hi.path[k]);
  }
}

TEST_CASE("Wilson interval") {
  const auto [lo, hi] = wilson_interval(5, 10);
  CHECK(lo == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.7634).epsilon(1e-3));
  CHECK(wilson_interval(0, 100).first == 0.0);
  CHECK(wilson_interval(100, 100).second == 1.0);
}

TEST_CASE("survival curve") {
  const std::uint64_t n_paths = 400000;
  const SurvivalCurve c = survival_curve_mc(kGauss, 0.0, 20, n_paths, 3);
  CHECK(c.p_hat[0] == 1.0);
  CHECK(std::abs(c.p_hat[1] - 0.5) < 3.0 * std::sqrt(0.25 / n_paths));
  for (std::size_t n = 0; n < c.size(); ++n) {
    CHECK(c.ci_lo[n] <= c.p_hat[n]);
    CHECK(c.p_hat[n] <= c.ci_hi[n]);
    if (n > 0) CHECK(c.p_hat[n] <= c.p_hat[n - 1]);
  }
  CHECK_THROWS_AS(survival_curve_mc(kGauss, 0.0, 20, 50, 3), Error);

  const std::string csv = c.to_csv();
  CHECK(csv.rfind("n,survivors,paths,p_hat,ci_lo,ci_hi\n", 0) == 0);
}

TEST_CASE("survival curve does not depend on the thread count") {
  SimOptions one, three;
  one.block_size = three.block_size = 1000;
  three.threads = 3;
  const SurvivalCurve a = survival_curve_mc(kGauss, 1.0, 15, 20000, 17, one);
  const SurvivalCurve b = survival_curve_mc(kGauss, 1.0, 15, 20000, 17, three);
  CHECK(a.survivors == b.survivors);
}

TEST_CASE("survival is identically one without killing") {
  const SurvivalCurve c = survival_curve_mc(ChainParams{0.5, Uniform{0.0, 1.0}}, 0.5, 40, 1000, 1);
  for (double p : c.p_hat) CHECK(p == 1.0);
}

TEST_CASE("conditional law") {
  const std::vector<double> edges{0.0, 0.5, 1.0, 1.5, 2.0};
  SUBCASE("n = 0 is a point mass at x0") {
    const ConditionalLaw law = conditional_law_mc(kGauss, 1.2, 0, edges, 1000, 5);
    CHECK(law.survivors == 1000);
    CHECK(law.counts[2] == 1000);
  }
  SUBCASE("bounded innovations stay inside (0, R_*]") {
    const ChainParams u{0.5, Uniform{-1.0, 1.0}};
    const ConditionalLaw law = conditional_law_mc(u, 2.0, 8, edges, 200000, 5);
    CHECK(law.counts.back() == 0);  // [2, inf)
    double total = 0.0;
    for (double m : law.conditional_masses()) total += m;
    CHECK(total == doctest::Approx(1.0));
  }
  SUBCASE("too few survivors") {
    CHECK_THROWS_AS(conditional_law_mc(kGauss, 0.1, 40, edges, 1000, 5), Error);
  }
}

TEST_CASE("supermultiplicativity within Monte Carlo error") {
  const double x = 1.0;
  const long n = 3, m = 4;
  const std::uint64_t paths = 400000;
  const SurvivalCurve c = survival_curve_mc(kGauss, x, n + m, paths, 21);
  const std::vector<double> edges{x};
  const ConditionalLaw law = conditional_law_mc(kGauss, x, n, edges, paths, 22);
  const auto [q, q_se] = law.conditional_exceedance(0);
  const double lhs = c.p_hat[n + m];
  const double rhs = c.p_hat[n] * q * c.p_hat[m];
  const double se = std::sqrt(lhs * (1 - lhs) / paths) + rhs * (q_se / q);
  CHECK(lhs >= rhs - 4.0 * se);
}

TEST_CASE("stationary law") {
  RandomStream s(8);
  const int n = 1000000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = stationary_sample(kGauss, 1e-12, s);
    s1 += x;
    s2 += x * x;
  }
  const double var = s2 / n - (s1 / n) * (s1 / n);
  CHECK(std::abs(var - 4.0 / 3.0) < 0.006);

  const ChainParams u{0.5, Uniform{-1.0, 1.0}};
  for (int i = 0; i < 10000; ++i) {
    const double x = stationary_sample(u, 1e-12, s);
    CHECK(std::abs(x) <= 2.0);
  }
  CHECK(std::pow(0.5, stationary_truncation(u, 1e-12)) * interquartile_range(u.innovation) / 0.5 < 1e-12);
}

TEST_CASE("one more step leaves the stationary law invariant") {
  RandomStream s(31), t(32);
  const int n = 100000;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) x[i] = stationary_sample(kGauss, 1e-12, s);
  for (int i = 0; i < n; ++i) y[i] = kGauss.a * stationary_sample(kGauss, 1e-12, t) + sample(kGauss.innovation, t);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  // two-sample Kolmogorov-Smirnov statistic
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j]) ++i; else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / n));
  }
  CHECK(d < 1.36 * std::sqrt(2.0 / n));
}

#include <doctest.h>

#include <cmath>

#include "persist/errors.hpp"
#include "persist/kernel.hpp"
#include "persist/oracles.hpp"
#include "persist/renewal.hpp"
#include "persist/spectral.hpp"
#include "support/reference.hpp"

using namespace persist;

namespace {
const ChainParams kGauss{0.5, Gaussian{}};

KernelBlocks gaussian_blocks(std::size_t n = 300) { return assemble_blocks(kGauss, build_grid(kGauss, 3.0, 24.0, n)); }

KernelBlocks two_state() {
  Eigen::MatrixXd q(2, 2);
  q << 0.4, 0.2, 0.1, 0.5;
  return blocks_from_matrix(q, Eigen::Vector2d(0.4, 0.4), 1);
}
}  // namespace

TEST_CASE("two-state excursion operator") {
  const KernelBlocks b = two_state();
  for (double lambda : {0.0, 0.2, 0.45}) {
    const double z = std::exp(lambda);
    const RenewalSystem s = assemble(b, lambda);
    // K = z^2 Q_AB Q_BA / ((1 - 0.4 z)(1 - 0.5 z))
    CHECK(s.K(0, 0) == doctest::Approx(z * z * 0.02 / ((1 - 0.4 * z) * (1 - 0.5 * z))).epsilon(1e-13));
    CHECK(s.F[0] ==
          doctest::Approx(z * 0.4 / (1 - 0.4 * z) + z * z * 0.2 * 0.4 / ((1 - 0.4 * z) * (1 - 0.5 * z))).epsilon(1e-13));
  }
  const double z_star = ref::smaller_quadratic_root(0.18, -0.9, 1.0);
  CHECK(z_star == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  const RootResult root = find_lambda_root(b, {0.0, 0.69}, 1e-12);
  CHECK(std::abs(root.lambda_star - std::log(z_star)) < 1e-10);
  CHECK(std::abs(root.lambda_star - leading_eigentriple(b.Q, 1e-14).lambda_a) < 1e-10);
  CHECK(root.hi - root.lo <= 1e-12);
}

TEST_CASE("diverging series are refused") {
  const KernelBlocks b = two_state();
  // z r(Q_BB) = 0.5 z reaches 1 at lambda = log 2
  try {
    assemble(b, std::log(2.0) + 0.01);
    FAIL("expected SeriesDiverges");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SeriesDiverges);
    CHECK(std::string(e.what()).rfind("B", 0) == 0);
  }
  const RenewalOperator op(b);
  CHECK(op.lambda_limit_B() == doctest::Approx(std::log(2.0)));
  CHECK(op.lambda_limit_A() == doctest::Approx(std::log(2.5)));
}

TEST_CASE("total probability at lambda = 0") {
  for (const ChainParams& p : {kGauss, ChainParams{0.5, Laplace{1.0}}}) {
    const double cap = select_cap(p, 3.0);
    const KernelBlocks b = assemble_blocks(p, build_grid(p, 3.0, cap, 300));
    const RenewalSystem s = assemble(b, 0.0);
    CHECK(s.K.minCoeff() >= 0.0);
    CHECK(((s.F + s.K * Eigen::VectorXd::Ones(s.F.size())).array() - 1.0).abs().maxCoeff() < 1e-8);
    const Eigen::VectorXd u = solve_renewal(s);
    CHECK((u.array() - 1.0).abs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("Schur complement identity") {
  const KernelBlocks b = gaussian_blocks();
  const double lam = leading_eigentriple(b).lambda_a;
  for (double lambda : {0.1, 0.5 * lam, 0.9 * lam}) {
    const RenewalSystem s = assemble(b, lambda);
    CHECK((s.F.array() >= std::exp(lambda) * b.kill_A().array() - 1e-15).all());
    const Eigen::VectorXd u = solve_renewal(s);
    const Eigen::VectorXd full = ref::full_grid_resolvent(b.Q, b.kill, lambda).head(b.n_a());
    CHECK((u - full).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(u.minCoeff() >= 1.0);
  }
}

TEST_CASE("r(K) increases with lambda and the root matches the spectrum") {
  const KernelBlocks b = gaussian_blocks();
  const RenewalOperator op(b);
  const auto [lo, hi] = default_bracket(op);
  double prev = -1.0;
  for (int k = 0; k <= 20; ++k) {
    const double lambda = lo + (hi - lo) * k / 20.0;
    const double r = op.assemble(lambda).spectral_radius_K;
    CHECK(r > prev);
    prev = r;
  }
  const RootResult root = find_lambda_root(b, {lo, hi}, 1e-12);
  const double lam = leading_eigentriple(b, 1e-12).lambda_a;
  CHECK(std::abs(root.lambda_star - lam) < 1e-6);
  CHECK(op.assemble(0.5 * root.lambda_star).spectral_radius_K < 1.0);
  CHECK(!root.trace.empty());
  CHECK(renewal_trace_csv(root).rfind("lambda,rho_K,valid_A,valid_B\n", 0) == 0);
}

TEST_CASE("Laplace root agrees with the spectrum on the same grid") {
  const ChainParams p{0.5, Laplace{1.0}};
  const KernelBlocks b = assemble_blocks(p, build_grid(p, 3.0, select_cap(p, 3.0), 300));
  const RootResult root = find_lambda_root(b, default_bracket(RenewalOperator(b)), 1e-12);
  CHECK(std::abs(root.lambda_star - leading_eigentriple(b, 1e-12).lambda_a) < 1e-6);
}

TEST_CASE("bracket errors") {
  const KernelBlocks b = two_state();
  CHECK_THROWS_AS(find_lambda_root(b, {0.6, 0.65}, 1e-10), Error);
  try {
    find_lambda_root(b, {0.0, 0.3}, 1e-10);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadBracket);
  }
  try {
    find_lambda_root(b, {0.0, 0.8}, 1e-10);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainExceeded);
  }
}

TEST_CASE("solving at the root is singular") {
  const KernelBlocks b = two_state();
  RenewalSystem s = assemble(b, std::log(5.0 / 3.0));
  CHECK(s.spectral_radius_K == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve_renewal(s), Error);
}

TEST_CASE("heavy tails: the B series is refused") {
  const ChainParams p{0.8, TwoSidedPareto{1.0, 1.0, 1.0}};
  const KernelBlocks b = assemble_blocks(p, build_grid(p, 5.0, 400.0, 400));
  const RenewalOperator op(b);
  CHECK(op.radius_B() >= 0.8);
  try {
    assemble(b, -std::log(0.8) + 1e-3);
    FAIL("expected SeriesDiverges");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SeriesDiverges);
  }
}

TEST_CASE("coming down from above r") {
  const double bound_at_r = coming_down_bound(kGauss, 5.0, 1.5, 0.3, 5.0);
  CHECK(bound_at_r == doctest::Approx(2.0 * std::exp(0.3)));
  double prev = 0.0;
  for (double x0 : {5.0, 10.0, 20.0, 40.0}) {
    const double v = coming_down_bound(kGauss, 5.0, 1.5, 0.3, x0);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(coming_down_bound(kGauss, 5.0, 1.9, 0.3, 20.0) < coming_down_bound(kGauss, 5.0, 1.5, 0.3, 20.0));
  CHECK_THROWS_AS(coming_down_bound(kGauss, 5.0, 2.0, 0.3, 20.0), Error);
  CHECK_THROWS_AS(coming_down_bound(kGauss, 5.0, 1.0, 0.3, 20.0), Error);

  const ComingDownEstimate mc = coming_down_mc(kGauss, 5.0, 0.3, 20.0, 100000, 12);
  CHECK(mc.censored == 0);
  CHECK(mc.ci_lo <= coming_down_bound(kGauss, 5.0, 1.5, 0.3, 20.0));
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "persist/errors.hpp"
#include "persist/kernel.hpp"
#include "persist/oracles.hpp"
#include "persist/spectral.hpp"
#include "support/reference.hpp"

using namespace persist;

namespace {
const ChainParams kGauss{0.5, Gaussian{}};

Eigen::MatrixXd two_state() {
  Eigen::MatrixXd q(2, 2);
  q << 0.4, 0.2, 0.1, 0.5;
  return q;
}
}  // namespace

TEST_CASE("two-state kernel") {
  const Eigen::MatrixXd q = two_state();
  const EigenTriple t = leading_eigentriple(q, 1e-14);
  const double rho = ref::perron_2x2(q);  // trace 0.9, det 0.18
  CHECK(std::abs(t.rho - rho) < 1e-12);
  CHECK(std::abs(rho - 0.6) < 1e-15);
  CHECK(t.lambda_a == doctest::Approx(-std::log(0.6)).epsilon(1e-12));
  // (Q - 0.6 I) V = 0 forces v1 = v2; nu Q = 0.6 nu forces nu2 = 2 nu1
  CHECK(std::abs(t.V[0] - 1.0) < 1e-12);
  CHECK(std::abs(t.V[1] - 1.0) < 1e-12);
  CHECK(std::abs(t.nu[0] - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(t.nu[1] - 2.0 / 3.0) < 1e-12);
  CHECK(harmonic_residual(t, q) < 1e-12);
}

TEST_CASE("scaled identity") {
  const Eigen::MatrixXd q = 0.7 * Eigen::MatrixXd::Identity(5, 5);
  const EigenTriple t = leading_eigentriple(q);
  CHECK(t.rho == doctest::Approx(0.7));
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(t.nu[i] == doctest::Approx(0.2));
    CHECK(t.V[i] == doctest::Approx(1.0));
  }
}

TEST_CASE("degenerate kernels") {
  CHECK_THROWS_AS(leading_eigentriple(Eigen::MatrixXd::Zero(3, 3)), Error);
  Eigen::MatrixXd stochastic(2, 2);
  stochastic << 0.5, 0.5, 0.3, 0.7;
  CHECK_THROWS_AS(leading_eigentriple(stochastic), Error);
  try {
    leading_eigentriple(Eigen::MatrixXd::Zero(3, 3));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateKernel);
  }
}

TEST_CASE("non-convergence is reported") {
  // period two: power iteration from the ones vector oscillates
  Eigen::MatrixXd rot(2, 2);
  rot << 0.0, 0.5, 0.2, 0.0;
  try {
    leading_eigentriple(rot, 1e-12, 50);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
  }
}

TEST_CASE("Laplace discretization against the closed form") {
  const ChainParams p{0.5, Laplace{1.0}};
  const double cap = select_cap(p, 2.0);
  const KernelBlocks b = assemble_blocks(p, build_grid(p, 2.0, cap, 400));
  const EigenTriple t = leading_eigentriple(b);
  CHECK(std::abs(t.lambda_a - ref::laplace_root(0.5).first) < 1e-3);
}

TEST_CASE("Gaussian eigentriple invariants") {
  const Grid g = build_grid(kGauss, 3.0, 24.0, 400);
  const KernelBlocks b = assemble_blocks(kGauss, g);
  const EigenTriple t = leading_eigentriple(b, 1e-10);
  CHECK(t.nu.minCoeff() >= 0.0);
  CHECK(t.nu.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.V.minCoeff() > 0.0);
  CHECK(t.nu.dot(t.V) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.residual <= 1e-10);
  CHECK(harmonic_residual(t, b) <= 1e-8);
  CHECK(quasi_stationarity_residual(t, b.Q) <= 2e-10);
  CHECK(monotonicity_defect(t.V) == 0.0);
  CHECK(t.lambda_a > 0.0);
  MESSAGE("gap proxy " << t.gap_proxy);
}

TEST_CASE("kill and reflect policies bracket lambda_a and meet under cap doubling") {
  double previous = 1.0;
  for (double cap : {6.0, 12.0, 24.0}) {
    const Grid g = build_grid(kGauss, 3.0, cap, static_cast<std::size_t>(cap * 20));
    const double kill = leading_eigentriple(assemble_blocks(kGauss, g, OverflowPolicy::Kill), 1e-12).lambda_a;
    const double reflect = leading_eigentriple(assemble_blocks(kGauss, g, OverflowPolicy::ReflectTop), 1e-12).lambda_a;
    CHECK(kill >= reflect);
    const double gap = kill - reflect;
    CHECK(gap <= 0.5 * previous + 1e-12);
    previous = gap;
  }
}

TEST_CASE("perturbing V raises the residual") {
  const KernelBlocks b = assemble_blocks(kGauss, build_grid(kGauss, 3.0, 24.0, 200));
  EigenTriple t = leading_eigentriple(b);
  RandomStream s(3);
  for (Eigen::Index i = 0; i < t.V.size(); ++i) t.V[i] *= 1.0 + 0.01 * (2.0 * s.uniform() - 1.0);
  CHECK(harmonic_residual(t, b) >= 1e-3);
}

TEST_CASE("survival prediction") {
  const Grid g = build_grid(kGauss, 3.0, 24.0, 400);
  const EigenTriple t = leading_eigentriple(assemble_blocks(kGauss, g));
  for (long n : {5L, 10L, 20L})
    CHECK(survival_prediction(t, g, 1.0, n + 1) / survival_prediction(t, g, 1.0, n) ==
          doctest::Approx(std::exp(-t.lambda_a)).epsilon(1e-12));
  double prev = 0.0;
  for (double x = 0.0; x <= 24.0; x += 0.25) {
    const double p = survival_prediction(t, g, x, 10);
    CHECK(p >= prev);
    prev = p;
  }
  CHECK_THROWS_AS(survival_prediction(t, g, 25.0, 10), Error);
  // prefactor identity: W e^{-lambda (n+2)} / (1 - e^{-lambda}) = V rho^n
  const double v = interpolate_V(t, g, 1.0);
  CHECK(survival_prediction(t, g, 1.0, 12) == doctest::Approx(v * std::pow(t.rho, 12)).epsilon(1e-12));
}

TEST_CASE("exports") {
  const KernelBlocks b = assemble_blocks(kGauss, build_grid(kGauss, 3.0, 24.0, 32));
  const EigenTriple t = leading_eigentriple(b);
  std::istringstream csv(eigentriple_csv(t, b.grid));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "node,weight,V,nu");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 32);
  const auto j = eigentriple_scalars(t);
  for (const char* k : {"rho", "lambda_a", "residual", "iterations"}) CHECK(j.contains(k));
}

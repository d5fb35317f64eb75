#pragma once

// Reference values computed without the library: closed forms, hand-solved
// small systems and dense solves with a different factorization.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

namespace ref {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Larger root of t^2 - tr t + det for a 2x2 matrix.
inline double perron_2x2(const Eigen::Matrix2d& m) {
  const double tr = m.trace();
  const double det = m.determinant();
  return 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
}

// Smallest root of c2 z^2 + c1 z + c0.
inline double smaller_quadratic_root(double c2, double c1, double c0) {
  const double disc = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
  return std::min((-c1 - disc) / (2.0 * c2), (-c1 + disc) / (2.0 * c2));
}

// prod_{k<terms} (1 - u q^k), fixed length
inline double q_product(double u, double q, int terms = 400) {
  double v = 1.0;
  double uq = u;
  for (int k = 0; k < terms; ++k, uq *= q) v *= 1.0 - uq;
  return v;
}

// log s* for Laplace innovations, by TOMS 748 on the closed-form denominator.
// The denominator is positive at s = 1 and negative at s = 1/a.
inline std::pair<double, double> laplace_root(double a) {
  auto den = [a](double s) { return q_product(a * s, a * a) + q_product(s, a * a); };
  // walk up from 1 to the first sign change so the smallest root is bracketed
  double lo = 1.0;
  double hi = 1.0 / a;
  const int steps = 2000;
  for (int i = 1; i <= steps; ++i) {
    const double s = 1.0 + (1.0 / a - 1.0) * i / steps;
    if (den(s) <= 0.0) {
      hi = s;
      break;
    }
    lo = s;
  }
  std::uintmax_t iters = 200;
  const auto [l, h] = boost::math::tools::toms748_solve(den, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return {std::log(0.5 * (l + h)), 0.5 * (l + h)};
}

// E_x[e^{lambda T_0}] on every node: z (I - z Q)^{-1} kill, with full pivoting.
inline Eigen::VectorXd full_grid_resolvent(const Eigen::MatrixXd& q, const Eigen::VectorXd& kill, double lambda) {
  const double z = std::exp(lambda);
  const Eigen::Index n = q.rows();
  return Eigen::FullPivLU<Eigen::MatrixXd>(Eigen::MatrixXd::Identity(n, n) - z * q).solve(z * kill);
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace ref

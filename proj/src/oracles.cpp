#include "persist/oracles.hpp"

#include <cmath>

#include "persist/errors.hpp"

namespace persist {

QPochhammerEval q_pochhammer(double u, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw Error(ErrorKind::OutOfRange, "q must lie in [0, 1)");
  QPochhammerEval out{u, q, 1.0, 0, 0.0};
  double uq = u;  // u q^k
  for (;;) {
    out.value *= 1.0 - uq;
    ++out.terms_used;
    uq *= q;
    // The remaining factors multiply the value by exp(theta), |theta| <= t.
    const double tail = std::abs(uq) / (1.0 - q);
    if (tail < 0.5) {
      const double t = tail / (1.0 - tail);
      out.truncation_bound = std::abs(out.value) * std::expm1(t);
      if (out.truncation_bound < 1e-15 * std::max(1.0, std::abs(out.value)) || out.value == 0.0) break;
    }
    if (out.terms_used > 100000) break;
  }
  return out;
}

double laplace_denominator(double s, double a) {
  const double q = a * a;
  return q_pochhammer(a * s, q).value + q_pochhammer(s, q).value;
}

double laplace_gf(double s, double a) {
  if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::InvalidModel, "a must lie in (0,1)");
  const double q = a * a;
  const double num = q_pochhammer(a * s, q).value;
  const double den = num + q_pochhammer(s, q).value;
  if (!(den > 0.0)) throw Error(ErrorKind::PastPole, "s is at or beyond the pole of the generating function");
  if (s >= 1.0 / a) throw Error(ErrorKind::PastPole, "s is beyond the smallest pole 1 < s* < 1/a");
  return s * num / den;
}

LaplaceRoot laplace_lambda_a(double a) {
  if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::InvalidModel, "a must lie in (0,1)");
  // scan for the first sign change, then bisect
  const int scan = 4096;
  double lo = 1.0;
  double hi = 1.0 / a;
  for (int i = 1; i <= scan; ++i) {
    const double s = 1.0 + (1.0 / a - 1.0) * i / scan;
    if (laplace_denominator(s, a) <= 0.0) {
      hi = s;
      break;
    }
    lo = s;
  }
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (laplace_denominator(mid, a) > 0.0 ? lo : hi) = mid;
  }
  LaplaceRoot r;
  r.s_lo = lo;
  r.s_hi = hi;
  r.s_star = 0.5 * (lo + hi);
  r.lambda_a = std::log(r.s_star);
  return r;
}

OuParams gaussian_ou_params(double a) {
  if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::InvalidModel, "a must lie in (0,1)");
  const double theta = -std::log(a);
  return {theta, 2.0 * theta / (1.0 - a * a)};
}

double pareto_lambda_a(double r, double a) {
  if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::InvalidModel, "a must lie in (0,1)");
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidModel, "tail index must be positive");
  return -r * std::log(a);
}

FiniteChainOracle finite_chain_oracle() {
  Eigen::MatrixXd q(2, 2);
  q << 0.4, 0.2, 0.1, 0.5;
  const Eigen::Vector2d kill(0.4, 0.4);
  FiniteChainOracle o{blocks_from_matrix(q, kill, 1), {}, std::log(5.0 / 3.0)};
  // eigenvalues of Q are 0.6 and 0.3; Q(1,1) = 0.6 (1,1), (1,2) Q = 0.6 (1,2)
  o.exact.rho = 0.6;
  o.exact.lambda_a = -std::log(0.6);
  o.exact.V = Eigen::Vector2d(1.0, 1.0);
  o.exact.nu = Eigen::Vector2d(1.0 / 3.0, 2.0 / 3.0);
  o.exact.gap_proxy = 0.5;
  return o;
}

}  // namespace persist

#include "persist/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace persist {

PerronRoot perron_root(const Eigen::Ref<const Eigen::MatrixXd>& m, double rel_tol, int max_iter,
                       const Eigen::VectorXd* warm_start) {
  const Eigen::Index n = m.rows();
  PerronRoot out;
  if (n == 0 || m.maxCoeff() <= 0.0) {
    out.vector = Eigen::VectorXd::Zero(n);
    out.converged = true;
    return out;
  }

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  if (warm_start && warm_start->size() == n && warm_start->minCoeff() >= 0.0 && warm_start->maxCoeff() > 0.0) {
    // keep every coordinate strictly positive so no component is lost
    v = warm_start->array().max(1e-300) / warm_start->maxCoeff();
  }

  double previous = -1.0;
  int stable = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd w = m * v;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v[i] <= 0.0) continue;
      const double ratio = w[i] / v[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    const double norm = w.maxCoeff();
    out.iterations = it;
    out.lower = std::isfinite(lo) ? lo : 0.0;
    out.upper = hi;
    if (norm <= 0.0) {
      // nilpotent on the current support
      out.radius = 0.0;
      out.lower = 0.0;
      out.vector = v;
      out.converged = true;
      return out;
    }
    v = w / norm;
    if (hi - out.lower <= rel_tol * hi) {
      out.radius = 0.5 * (hi + out.lower);
      out.vector = v;
      out.converged = true;
      return out;
    }
    // Reducible matrices can keep the lower bound pinned at 0; fall back on
    // stabilisation of the growth factor.
    if (previous > 0.0 && std::abs(norm - previous) <= rel_tol * norm) {
      if (++stable >= 8) {
        out.radius = norm;
        out.vector = v;
        out.converged = true;
        return out;
      }
    } else {
      stable = 0;
    }
    previous = norm;
  }
  out.radius = previous;
  out.vector = v;
  return out;
}

}  // namespace persist

#pragma once

#include <Eigen/Dense>

namespace persist {

// Perron root of a nonnegative square matrix by power iteration, bracketed by
// the Collatz-Wielandt bounds min_i (Mv)_i / v_i <= r(M) <= max_i (Mv)_i / v_i
// (rows with v_i = 0 are skipped).
struct PerronRoot {
  double radius = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  Eigen::VectorXd vector;  // nonnegative, max-norm 1
  int iterations = 0;
  bool converged = false;
};

PerronRoot perron_root(const Eigen::Ref<const Eigen::MatrixXd>& m, double rel_tol = 1e-13, int max_iter = 200000,
                       const Eigen::VectorXd* warm_start = nullptr);

}  // namespace persist

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "persist/chain.hpp"
#include "persist/kernel.hpp"

namespace persist {

// Renewal decomposition of u(x) = E_x[e^{lambda T_0}] on the A-nodes, with
// z = e^lambda, R_A = (I - z Q_AA)^{-1}, R_B = (I - z Q_BB)^{-1}:
//   F = z R_A kill_A + z^2 R_A Q_AB R_B kill_B     (absorbed before returning to A)
//   K = z^2 R_A Q_AB R_B Q_BA                       (excursion above r and back)
//   u = F + K u.
struct RenewalSystem {
  double lambda = 0.0;
  Eigen::VectorXd F;
  Eigen::MatrixXd K;
  bool valid_A = false;
  bool valid_B = false;
  double spectral_radius_K = 0.0;
  double radius_K_lower = 0.0;  // Collatz-Wielandt bracket of spectral_radius_K
  double radius_K_upper = 0.0;
};

struct RenewalTracePoint {
  double lambda = 0.0;
  double rho_K = 0.0;
  bool valid_A = false;
  bool valid_B = false;
};

struct RootResult {
  double lambda_star = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
  std::vector<RenewalTracePoint> trace;
};

// Holds the blocks and the lambda-independent block radii. For regularly
// varying innovations the B-block radius is floored by a^r: the chain stays
// above any level for n steps with probability at least of order a^{rn}, a
// tail the truncated grid cannot represent.
class RenewalOperator {
 public:
  explicit RenewalOperator(const KernelBlocks& blocks);

  // Throws SeriesDiverges("A" or "B") when z times a block radius reaches 1.
  [[nodiscard]] RenewalSystem assemble(double lambda) const;

  // Largest lambda for which the A (resp. B) geometric series converges.
  [[nodiscard]] double lambda_limit_A() const { return -std::log(radius_A_); }
  [[nodiscard]] double lambda_limit_B() const { return -std::log(radius_B_); }
  [[nodiscard]] double radius_A() const { return radius_A_; }
  [[nodiscard]] double radius_B() const { return radius_B_; }
  [[nodiscard]] double radius_B_grid() const { return radius_B_grid_; }
  [[nodiscard]] const KernelBlocks& blocks() const { return *blocks_; }

 private:
  const KernelBlocks* blocks_;
  double radius_A_ = 0.0;
  double radius_B_ = 0.0;
  double radius_B_grid_ = 0.0;
};

RenewalSystem assemble(const KernelBlocks& blocks, double lambda);

// u = (I - K)^{-1} F. Throws SingularAtRoot when r(K) is within 1e-10 of 1.
Eigen::VectorXd solve_renewal(const RenewalSystem& system);

// Bisection on the sign of r(K_lambda) - 1 down to a bracket of width tol.
// Throws BadBracket unless r(K_lo) < 1 < r(K_hi), DomainExceeded if an
// endpoint leaves the validity domain.
RootResult find_lambda_root(const KernelBlocks& blocks, std::pair<double, double> bracket, double tol = 1e-10);

// Default bracket: [0, just below the validity limit].
std::pair<double, double> default_bracket(const RenewalOperator& op);

std::string renewal_trace_csv(const RootResult& root);

// 2 e^lambda (x0 / r)^{lambda / log A} for A in (1, 1/a). Throws InvalidRatio
// outside that range and InvalidModel when xi^+ lacks some power moment.
double coming_down_bound(const ChainParams& params, double r, double A_ratio, double lambda, double x0);

struct ComingDownEstimate {
  double mean = 0.0;  // E_x0[e^{lambda T_r}] over uncensored paths
  double stderr_ = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t censored = 0;  // paths with T_r beyond the horizon
};

ComingDownEstimate coming_down_mc(const ChainParams& params, double r, double lambda, double x0, std::uint64_t n_paths,
                                  std::uint64_t seed, long horizon = 200, unsigned threads = 1);

}  // namespace persist

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "persist/chain.hpp"

namespace persist {

// Midpoint: one node per cell, entries are exact cell masses
//   Q_ij = P(a x_i + xi in cell_j),
// which agrees with phi(x_j - a x_i) w_j up to O(h^3) and keeps every row
// mass-conserving. GaussLegendreComposite: four Gauss-Legendre nodes per cell,
// Nystrom entries phi(x_j - a x_i) w_j.
enum class QuadratureScheme { Midpoint, GaussLegendreComposite };

// Mass leaving (0, cap]: dropped (lower bracket for the survival eigenvalue)
// or put on the top node (upper bracket).
enum class OverflowPolicy { Kill, ReflectTop };

std::string to_string(QuadratureScheme scheme);
std::string to_string(OverflowPolicy policy);
QuadratureScheme scheme_from_string(const std::string& s);
OverflowPolicy policy_from_string(const std::string& s);

struct Grid {
  std::vector<double> nodes;    // ascending in (0, cap]
  std::vector<double> weights;  // sum to cap
  std::vector<double> cell_lo;  // cell containing each node (shared by GL nodes of a cell)
  std::vector<double> cell_hi;
  std::size_t r_split = 0;      // nodes [0, r_split) lie in A = (0, r]
  double r = 0.0;
  double cap = 0.0;
  QuadratureScheme scheme = QuadratureScheme::Midpoint;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
  // Cell boundaries, ascending, from 0 to cap.
  [[nodiscard]] std::vector<double> boundaries() const;
};

// A gets round(n r / cap) of the cells (at least one), B the rest, so r is
// always a cell boundary. Throws InvalidSplit unless 0 < r < cap.
Grid build_grid(const ChainParams& params, double r, double cap, std::size_t n_nodes,
                QuadratureScheme scheme = QuadratureScheme::Midpoint);

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

struct KernelBlocks {
  ChainParams params;
  Grid grid;
  OverflowPolicy policy = OverflowPolicy::Kill;
  Eigen::MatrixXd Q;         // full killed kernel on the grid
  Eigen::VectorXd kill;      // one-step mass into (-inf, 0]
  Eigen::VectorXd overflow;  // one-step mass beyond cap (already on the top node under ReflectTop)

  [[nodiscard]] Eigen::Index n() const { return Q.rows(); }
  [[nodiscard]] Eigen::Index n_a() const { return static_cast<Eigen::Index>(grid.r_split); }
  [[nodiscard]] Eigen::Index n_b() const { return n() - n_a(); }

  [[nodiscard]] auto Q_AA() const { return Q.topLeftCorner(n_a(), n_a()); }
  [[nodiscard]] auto Q_AB() const { return Q.topRightCorner(n_a(), n_b()); }
  [[nodiscard]] auto Q_BA() const { return Q.bottomLeftCorner(n_b(), n_a()); }
  [[nodiscard]] auto Q_BB() const { return Q.bottomRightCorner(n_b(), n_b()); }
  [[nodiscard]] auto kill_A() const { return kill.head(n_a()); }
  [[nodiscard]] auto kill_B() const { return kill.tail(n_b()); }
  [[nodiscard]] auto overflow_A() const { return overflow.head(n_a()); }
  [[nodiscard]] auto overflow_B() const { return overflow.tail(n_b()); }

  // Row sums of Q plus kill plus (under Kill) overflow; 1 for an exact kernel.
  [[nodiscard]] Eigen::VectorXd row_totals() const;
  [[nodiscard]] double max_overflow() const { return overflow.size() ? overflow.maxCoeff() : 0.0; }
};

// Throws MassDefect when some row total misses 1 by more than 1e-6.
KernelBlocks assemble_blocks(const ChainParams& params, const Grid& grid, OverflowPolicy policy = OverflowPolicy::Kill);

// Wraps a hand-made substochastic matrix (test fixtures). Nodes are 1..n with
// unit weights; the first n_a states form A.
KernelBlocks blocks_from_matrix(const Eigen::MatrixXd& q, const Eigen::VectorXd& kill, Eigen::Index n_a);

// Smallest cap = 2^k r (k >= 1) with max overflow below overflow_tol; R_* for
// bounded innovations when R_* > r. Throws DomainExceeded if no cap up to
// 2^max_doublings r works.
double select_cap(const ChainParams& params, double r, double overflow_tol = 1e-10, int max_doublings = 40);

struct Minorization {
  double kappa = 0.0;
  bool vanishes = false;  // density hits 0 somewhere on [R - y0, R]
};

// inf of the density over [R - y0, R] on a fine mesh. Throws NotBounded for
// models unbounded above.
Minorization minorization_constant(const InnovationModel& model, double y0);
Minorization minorization_constant(const std::function<double(double)>& density, double ess_sup, double y0);

// Lambda(x) = E_x[exp(lambda_tilde T_M)] on the grid nodes above M for the
// unkilled chain, from Lambda = e^lt (P(X_1 <= M) + P_BB Lambda).
struct LambdaWeight {
  double lambda_tilde = 0.0;
  double M = 0.0;
  std::size_t first_node = 0;  // nodes [first_node, n) lie above M
  Eigen::VectorXd values;
  bool finite = false;
  double growth = 0.0;  // spectral radius of e^lt P_BB
};

LambdaWeight lambda_weight(const KernelBlocks& blocks, double M, double lambda_tilde);

enum class QuasicompactCause { None, Truncation, Bound };

struct QuasicompactReport {
  double sup_ratio = 0.0;  // sup_x (Q_BB Lambda)(x) / Lambda(x)
  double bound = 0.0;      // e^{-lambda_tilde}
  double margin = 0.0;     // bound - sup_ratio
  bool holds = false;
  double max_overflow = 0.0;
  bool truncation_suspect = false;  // overflow above 1e-3 on the weighted nodes
  QuasicompactCause cause = QuasicompactCause::None;
};

// Throws Diverges when the weight is not finite.
QuasicompactReport quasicompact_diagnostic(const KernelBlocks& blocks, const LambdaWeight& weight);

}  // namespace persist

#include "persist/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "persist/errors.hpp"

namespace persist {

namespace {

struct PowerResult {
  Eigen::VectorXd vec;
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double contraction = 0.0;
};

// Power iteration from the all-ones vector; the eigenvalue is read off as the
// Rayleigh quotient v.Mv / v.v, the residual as ||Mv - value v||_inf / ||v||_inf.
template <class Matrix>
PowerResult power_iterate(const Matrix& m, double tol, int max_iter) {
  PowerResult out;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows());
  std::vector<double> history;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd w = m * v;
    const double norm = w.cwiseAbs().maxCoeff();
    if (!(norm > 0.0)) throw Error(ErrorKind::DegenerateKernel, "kernel annihilates the positive cone (zero matrix)");
    const double value = v.dot(w) / v.dot(v);
    const double residual = (w - value * v).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
    history.push_back(residual);
    out.iterations = it;
    out.value = value;
    out.residual = residual;
    if (residual <= tol) {
      out.vec = v;
      break;
    }
    v = w / norm;
  }
  if (out.vec.size() == 0) {
    throw Error(ErrorKind::NoConvergence, "power iteration did not converge in " + std::to_string(max_iter) +
                                             " iterations (last residual " + std::to_string(out.residual) + ")");
  }
  // geometric mean contraction of the residual over the last few steps
  const std::size_t k = std::min<std::size_t>(5, history.size() - 1);
  if (k > 0 && history[history.size() - 1 - k] > 0.0 && history.back() > 0.0) {
    out.contraction = std::pow(history.back() / history[history.size() - 1 - k], 1.0 / static_cast<double>(k));
  }
  return out;
}

}  // namespace

EigenTriple leading_eigentriple(const Eigen::MatrixXd& q, double tol, int max_iter) {
  if (q.rows() == 0 || q.rows() != q.cols()) throw Error(ErrorKind::DegenerateKernel, "kernel matrix must be square");
  if (q.minCoeff() < 0.0) throw Error(ErrorKind::DegenerateKernel, "kernel matrix has negative entries");
  if (q.maxCoeff() <= 0.0) throw Error(ErrorKind::DegenerateKernel, "kernel matrix is zero");

  const PowerResult right = power_iterate(q, tol, max_iter);
  const PowerResult left = power_iterate(q.transpose(), tol, max_iter);

  EigenTriple t;
  t.rho = right.value;
  if (!(t.rho < 1.0))
    throw Error(ErrorKind::DegenerateKernel, "leading eigenvalue is 1: the kernel does not kill, lambda_a = 0");
  t.lambda_a = -std::log(t.rho);
  t.nu = left.vec.cwiseMax(0.0);
  t.nu /= t.nu.sum();
  t.V = right.vec.cwiseMax(0.0);
  t.V /= t.nu.dot(t.V);
  t.residual = right.residual;
  t.left_residual = left.residual;
  t.iterations = std::max(right.iterations, left.iterations);
  t.gap_proxy = right.contraction;
  return t;
}

EigenTriple leading_eigentriple(const KernelBlocks& blocks, double tol, int max_iter) {
  return leading_eigentriple(blocks.Q, tol, max_iter);
}

double first_passage_prefactor(const EigenTriple& triple, double v_value) {
  const double z = std::exp(triple.lambda_a);
  return v_value * z * (z - 1.0);
}

double interpolate_V(const EigenTriple& triple, const Grid& grid, double x) {
  if (!(x >= 0.0) || x > grid.cap) throw Error(ErrorKind::OutOfRange, "x must lie in [0, cap]");
  const auto& nodes = grid.nodes;
  const auto& V = triple.V;
  if (nodes.size() == 1) return V[0];
  std::size_t j = static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin());
  // segment [j-1, j], clamped to the end segments
  j = std::clamp<std::size_t>(j, 1, nodes.size() - 1);
  const double t = (x - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
  const auto jj = static_cast<Eigen::Index>(j);
  return std::max(0.0, (1.0 - t) * V[jj - 1] + t * V[jj]);
}

double survival_prediction(const EigenTriple& triple, const Grid& grid, double x, long n) {
  const double w = first_passage_prefactor(triple, interpolate_V(triple, grid, x));
  const double lam = triple.lambda_a;
  return w * std::exp(-lam * static_cast<double>(n + 2)) / (1.0 - std::exp(-lam));
}

double harmonic_residual(const EigenTriple& triple, const Eigen::MatrixXd& q) {
  const Eigen::VectorXd image = std::exp(triple.lambda_a) * (q * triple.V);
  return (image - triple.V).cwiseAbs().maxCoeff() / triple.V.cwiseAbs().maxCoeff();
}

double harmonic_residual(const EigenTriple& triple, const KernelBlocks& blocks) {
  return harmonic_residual(triple, blocks.Q);
}

double quasi_stationarity_residual(const EigenTriple& triple, const Eigen::MatrixXd& q) {
  const Eigen::RowVectorXd evolved = triple.nu.transpose() * q;
  return (evolved / evolved.sum() - triple.nu.transpose()).cwiseAbs().sum();
}

double monotonicity_defect(const Eigen::VectorXd& v) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) worst = std::max(worst, v[i] - v[i + 1]);
  return worst / v.cwiseAbs().maxCoeff();
}

std::string eigentriple_csv(const EigenTriple& triple, const Grid& grid) {
  std::ostringstream os;
  os.precision(17);
  os << "node,weight,V,nu\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    os << grid.nodes[i] << ',' << grid.weights[i] << ',' << triple.V[k] << ',' << triple.nu[k] << '\n';
  }
  return os.str();
}

nlohmann::json eigentriple_scalars(const EigenTriple& triple) {
  return {{"rho", triple.rho},
          {"lambda_a", triple.lambda_a},
          {"residual", triple.residual},
          {"left_residual", triple.left_residual},
          {"iterations", triple.iterations},
          {"gap_proxy", triple.gap_proxy}};
}

}  // namespace persist

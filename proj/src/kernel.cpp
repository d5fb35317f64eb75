#include "persist/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "persist/errors.hpp"
#include "persist/linalg.hpp"

namespace persist {

namespace {

constexpr int kGaussOrder = 4;

// P(shift + xi in (lo, hi]) without cancellation in either tail.
double cell_mass(const InnovationModel& model, double lo, double hi, double shift) {
  const double l = lo - shift;
  const double h = hi - shift;
  if (l >= 0.0) return std::max(0.0, survival(model, l) - survival(model, h));
  return std::max(0.0, cdf(model, h) - cdf(model, l));
}

bool near(double x, double y, double scale) { return std::abs(x - y) <= 1e-9 * std::max(1.0, scale); }

}  // namespace

std::string to_string(QuadratureScheme scheme) {
  return scheme == QuadratureScheme::Midpoint ? "midpoint" : "gauss_legendre_composite";
}

std::string to_string(OverflowPolicy policy) { return policy == OverflowPolicy::Kill ? "kill" : "reflect"; }

QuadratureScheme scheme_from_string(const std::string& s) {
  if (s == "midpoint") return QuadratureScheme::Midpoint;
  if (s == "gauss_legendre_composite" || s == "gauss_legendre") return QuadratureScheme::GaussLegendreComposite;
  throw Error(ErrorKind::InvalidConfig, "unknown quadrature scheme '" + s + "'");
}

OverflowPolicy policy_from_string(const std::string& s) {
  if (s == "kill") return OverflowPolicy::Kill;
  if (s == "reflect" || s == "reflect-to-top-node") return OverflowPolicy::ReflectTop;
  throw Error(ErrorKind::InvalidConfig, "unknown overflow policy '" + s + "'");
}

std::vector<double> Grid::boundaries() const {
  std::vector<double> b{0.0};
  for (std::size_t i = 0; i < size(); ++i) {
    if (cell_hi[i] > b.back()) b.push_back(cell_hi[i]);
  }
  return b;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
  std::vector<double> x(static_cast<std::size_t>(order));
  std::vector<double> w(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int newton = 0; newton < 100; ++newton) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[static_cast<std::size_t>(order - 1 - i)] = z;
    w[static_cast<std::size_t>(order - 1 - i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

Grid build_grid(const ChainParams& params, double r, double cap, std::size_t n_nodes, QuadratureScheme scheme) {
  validate(params);
  if (!(r > 0.0) || !(cap > 0.0) || !(r < cap))
    throw Error(ErrorKind::InvalidSplit, "threshold r must satisfy 0 < r < cap (r=" + std::to_string(r) +
                                             ", cap=" + std::to_string(cap) + ")");
  const std::size_t per_cell = scheme == QuadratureScheme::Midpoint ? 1 : kGaussOrder;
  if (n_nodes % per_cell != 0)
    throw Error(ErrorKind::InvalidSplit, "gauss_legendre_composite needs a multiple of 4 nodes");
  const std::size_t cells = n_nodes / per_cell;
  if (cells < 2) throw Error(ErrorKind::InvalidSplit, "need at least one cell on each side of r");
  auto cells_a = static_cast<std::size_t>(std::lround(static_cast<double>(cells) * r / cap));
  cells_a = std::clamp<std::size_t>(cells_a, 1, cells - 1);
  const std::size_t cells_b = cells - cells_a;

  std::vector<double> gx{0.0};
  std::vector<double> gw{2.0};
  if (scheme == QuadratureScheme::GaussLegendreComposite) std::tie(gx, gw) = gauss_legendre(kGaussOrder);

  Grid g;
  g.r = r;
  g.cap = cap;
  g.scheme = scheme;
  auto add_cells = [&](double from, double to, std::size_t count) {
    const double h = (to - from) / static_cast<double>(count);
    for (std::size_t c = 0; c < count; ++c) {
      const double lo = from + h * static_cast<double>(c);
      const double hi = (c + 1 == count) ? to : from + h * static_cast<double>(c + 1);
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      for (std::size_t q = 0; q < gx.size(); ++q) {
        g.nodes.push_back(mid + half * gx[q]);
        g.weights.push_back(half * gw[q]);
        g.cell_lo.push_back(lo);
        g.cell_hi.push_back(hi);
      }
    }
  };
  add_cells(0.0, r, cells_a);
  g.r_split = g.nodes.size();
  add_cells(r, cap, cells_b);
  return g;
}

Eigen::VectorXd KernelBlocks::row_totals() const {
  Eigen::VectorXd t = Q.rowwise().sum() + kill;
  if (policy == OverflowPolicy::Kill) t += overflow;
  return t;
}

KernelBlocks assemble_blocks(const ChainParams& params, const Grid& grid, OverflowPolicy policy) {
  validate(params);
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (n == 0 || grid.r_split == 0 || grid.r_split >= grid.size())
    throw Error(ErrorKind::InvalidSplit, "grid must contain nodes on both sides of r");
  KernelBlocks b;
  b.params = params;
  b.grid = grid;
  b.policy = policy;
  b.Q.resize(n, n);
  b.kill.resize(n);
  b.overflow.resize(n);
  const InnovationModel& model = params.innovation;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shift = params.a * grid.nodes[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      b.Q(i, j) = grid.scheme == QuadratureScheme::Midpoint
                      ? cell_mass(model, grid.cell_lo[sj], grid.cell_hi[sj], shift)
                      : density(model, grid.nodes[sj] - shift) * grid.weights[sj];
    }
    b.kill[i] = cdf(model, -shift);
    b.overflow[i] = survival(model, grid.cap - shift);
    if (policy == OverflowPolicy::ReflectTop) b.Q(i, n - 1) += b.overflow[i];
  }
  const Eigen::VectorXd totals = b.row_totals();
  const double defect = (totals.array() - 1.0).abs().maxCoeff();
  if (defect > 1e-6) {
    throw Error(ErrorKind::MassDefect,
                "kernel rows miss total mass 1 by " + std::to_string(defect) + " (refine the grid or change scheme)");
  }
  return b;
}

KernelBlocks blocks_from_matrix(const Eigen::MatrixXd& q, const Eigen::VectorXd& kill, Eigen::Index n_a) {
  const Eigen::Index n = q.rows();
  if (q.cols() != n || kill.size() != n || n_a <= 0 || n_a >= n)
    throw Error(ErrorKind::InvalidSplit, "fixture matrix must be square with a proper A/B split");
  if (q.minCoeff() < 0.0 || kill.minCoeff() < 0.0) throw Error(ErrorKind::MassDefect, "negative kernel entry");
  KernelBlocks b;
  b.Q = q;
  b.kill = kill;
  b.overflow = Eigen::VectorXd::Zero(n);
  b.grid.cap = static_cast<double>(n);
  b.grid.r = static_cast<double>(n_a);
  b.grid.r_split = static_cast<std::size_t>(n_a);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.grid.nodes.push_back(static_cast<double>(i) + 1.0);
    b.grid.weights.push_back(1.0);
    b.grid.cell_lo.push_back(static_cast<double>(i) + 0.5);
    b.grid.cell_hi.push_back(static_cast<double>(i) + 1.5);
  }
  const double defect = (b.row_totals().array() - 1.0).abs().maxCoeff();
  if (defect > 1e-6) throw Error(ErrorKind::MassDefect, "fixture rows must sum to 1 including the kill column");
  return b;
}

double select_cap(const ChainParams& params, double r, double overflow_tol, int max_doublings) {
  validate(params);
  const TailInfo tail = classify_tail(params.innovation, params.a);
  if (tail.tail_class == TailClass::BoundedAbove) {
    if (!(tail.r_star > 0.0)) throw Error(ErrorKind::InvalidSplit, "R_* <= 0: the chain cannot stay positive");
    if (tail.r_star > r) return tail.r_star;
  }
  double cap = r;
  for (int k = 1; k <= max_doublings; ++k) {
    cap *= 2.0;
    // the top node sees the largest overflow; x = cap bounds it
    if (survival(params.innovation, cap * (1.0 - params.a)) < overflow_tol) return cap;
  }
  throw Error(ErrorKind::DomainExceeded, "no cap up to 2^" + std::to_string(max_doublings) +
                                             " r keeps the overflow below " + std::to_string(overflow_tol));
}

Minorization minorization_constant(const std::function<double(double)>& density_fn, double ess_sup, double y0) {
  if (!(y0 > 0.0)) throw Error(ErrorKind::OutOfRange, "y0 must be positive");
  constexpr int kMesh = 20000;
  double kappa = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kMesh; ++k) {
    const double y = ess_sup - y0 + y0 * static_cast<double>(k) / kMesh;
    kappa = std::min(kappa, density_fn(y));
  }
  Minorization m;
  m.kappa = std::max(0.0, kappa);
  m.vanishes = !(m.kappa > 0.0);
  return m;
}

Minorization minorization_constant(const InnovationModel& model, double y0) {
  const TailInfo tail = classify_tail(model, 0.5);
  if (tail.tail_class != TailClass::BoundedAbove)
    throw Error(ErrorKind::NotBounded, "minorization needs innovations bounded above");
  return minorization_constant([&model](double y) { return density(model, y); }, tail.ess_sup, y0);
}

LambdaWeight lambda_weight(const KernelBlocks& blocks, double M, double lambda_tilde) {
  const Grid& g = blocks.grid;
  if (!(M > 0.0) || M > g.r + 1e-9 * std::max(1.0, g.r))
    throw Error(ErrorKind::InvalidSplit, "M must lie in (0, r]");
  std::size_t first = g.size();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (near(g.cell_lo[i], M, g.cap)) {
      first = i;
      break;
    }
  }
  if (first == g.size()) throw Error(ErrorKind::InvalidSplit, "M must coincide with a cell boundary");

  const auto m = static_cast<Eigen::Index>(first);
  const Eigen::Index nb = blocks.n() - m;
  const auto pbb = blocks.Q.bottomRightCorner(nb, nb);
  Eigen::VectorXd target(nb);
  for (Eigen::Index i = 0; i < nb; ++i)
    target[i] = cdf(blocks.params.innovation, M - blocks.params.a * g.nodes[static_cast<std::size_t>(m + i)]);

  LambdaWeight w;
  w.lambda_tilde = lambda_tilde;
  w.M = M;
  w.first_node = first;
  const double z = std::exp(lambda_tilde);
  w.growth = z * perron_root(pbb).radius;
  if (!(w.growth < 1.0)) return w;
  const Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(nb, nb) - z * pbb;
  w.values = sys.partialPivLu().solve(z * target);
  w.finite = w.values.allFinite() && w.values.minCoeff() > 0.0;
  return w;
}

QuasicompactReport quasicompact_diagnostic(const KernelBlocks& blocks, const LambdaWeight& weight) {
  if (!weight.finite) throw Error(ErrorKind::Diverges, "Lambda weight is infinite: lambda_tilde too large for this M/cap");
  const auto m = static_cast<Eigen::Index>(weight.first_node);
  const Eigen::Index nb = blocks.n() - m;
  const Eigen::VectorXd image = blocks.Q.bottomRightCorner(nb, nb) * weight.values;
  QuasicompactReport rep;
  rep.sup_ratio = (image.array() / weight.values.array()).maxCoeff();
  rep.bound = std::exp(-weight.lambda_tilde);
  rep.margin = rep.bound - rep.sup_ratio;
  rep.holds = rep.sup_ratio <= rep.bound + 1e-8;
  rep.max_overflow = blocks.overflow.tail(nb).maxCoeff();
  rep.truncation_suspect = rep.max_overflow > 1e-3;
  if (rep.truncation_suspect) {
    rep.cause = QuasicompactCause::Truncation;
  } else if (!rep.holds) {
    rep.cause = QuasicompactCause::Bound;
  }
  return rep;
}

}  // namespace persist

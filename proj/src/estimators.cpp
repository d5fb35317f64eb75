#include "persist/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "persist/errors.hpp"

namespace persist {

namespace {

// tags keeping the substream families apart
constexpr std::uint64_t kInitTag = 0x1417;
constexpr std::uint64_t kMoveTag = 0x30e5;
constexpr std::uint64_t kResampleTag = 0x5a3b;

}  // namespace

SlopeEstimate lambda_from_slope(const SurvivalCurve& curve, std::pair<long, long> window) {
  const auto [n_lo, n_hi] = window;
  if (n_lo < 0 || n_hi - n_lo + 1 < 5 || n_hi >= static_cast<long>(curve.size()))
    throw Error(ErrorKind::EmptyWindow, "window needs at least five points inside the curve");
  const Eigen::Index m = n_hi - n_lo + 1;
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd y(m);
  Eigen::VectorXd p(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double pn = curve.p_hat[static_cast<std::size_t>(n_lo + i)];
    if (!(pn > 0.0))
      throw Error(ErrorKind::EmptyWindow, "no survivors at n = " + std::to_string(n_lo + i));
    p[i] = pn;
    X(i, 0) = 1.0;
    X(i, 1) = static_cast<double>(n_lo + i);
    y[i] = -std::log(pn);
  }

  SlopeEstimate est;
  est.n_lo = n_lo;
  est.n_hi = n_hi;
  if (curve.n_paths > 0 && p[0] < 1.0) {
    const auto N = static_cast<double>(curve.n_paths);
    Eigen::MatrixXd C(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        const double pm = p[std::min(i, j)];
        C(i, j) = (1.0 - pm) / (N * pm);
      }
    const Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd CiX = llt.solve(X);
      const Eigen::Matrix2d info = X.transpose() * CiX;
      const Eigen::Vector2d beta = info.ldlt().solve(CiX.transpose() * y);
      const Eigen::Matrix2d cov = info.inverse();
      est.intercept = beta[0];
      est.lambda_hat = beta[1];
      est.stderr_ = std::sqrt(std::max(0.0, cov(1, 1)));
      est.generalized = true;
      return est;
    }
  }
  const Eigen::Matrix2d xtx = X.transpose() * X;
  const Eigen::Vector2d beta = xtx.ldlt().solve(X.transpose() * y);
  const Eigen::VectorXd resid = y - X * beta;
  const double s2 = resid.squaredNorm() / static_cast<double>(m - 2);
  est.intercept = beta[0];
  est.lambda_hat = beta[1];
  est.stderr_ = std::sqrt(std::max(0.0, s2 * xtx.inverse()(1, 1)));
  return est;
}

double FvResult::survival_fraction(long step) const {
  return 1.0 - static_cast<double>(kills.at(static_cast<std::size_t>(step))) / static_cast<double>(n_particles);
}

std::string FvResult::trace_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "step,kills,survival_fraction\n";
  for (std::size_t s = 0; s < kills.size(); ++s)
    os << s << ',' << kills[s] << ',' << survival_fraction(static_cast<long>(s)) << '\n';
  return os.str();
}

FvResult fleming_viot(const ChainParams& params, std::uint64_t n_particles, long n_steps, std::uint64_t seed,
                      const FvOptions& options) {
  validate(params);
  if (n_particles < 1000) throw Error(ErrorKind::InvalidConfig, "fleming_viot needs at least 1000 particles");
  if (options.burn_in < 0 || options.burn_in >= n_steps)
    throw Error(ErrorKind::InvalidConfig, "burn_in must lie in [0, n_steps)");
  const std::uint64_t bs = std::max<std::uint64_t>(1, options.block_size);

  FvResult out;
  out.n_particles = n_particles;
  out.steps = n_steps;
  out.burn_in = options.burn_in;
  out.seed = seed;
  out.positions.assign(n_particles, 0.0);
  auto& pos = out.positions;

  // start from the positive part of the stationary law
  detail::for_blocks(
      n_particles, bs, options.threads, 0,
      [&](std::uint64_t b, std::uint64_t count, int&) {
        RandomStream stream = RandomStream::substream(seed, {kInitTag, b});
        for (std::uint64_t i = b * bs; i < b * bs + count; ++i) {
          int tries = 0;
          double x = 0.0;
          while (!((x = stationary_sample(params, options.stationary_tolerance, stream)) > 0.0)) {
            if (++tries > 100000)
              throw Error(ErrorKind::DegenerateConditioning, "stationary law puts no mass on (0, inf)");
          }
          pos[i] = x;
        }
      },
      [](int&, int) {});

  const double a = params.a;
  std::vector<std::uint64_t> alive;
  alive.reserve(n_particles);
  std::vector<double> log_fractions;
  for (long step = 0; step < n_steps; ++step) {
    detail::for_blocks(
        n_particles, bs, options.threads, 0,
        [&](std::uint64_t b, std::uint64_t count, int&) {
          RandomStream stream = RandomStream::substream(seed, {kMoveTag, static_cast<std::uint64_t>(step), b});
          for (std::uint64_t i = b * bs; i < b * bs + count; ++i) pos[i] = a * pos[i] + sample(params.innovation, stream);
        },
        [](int&, int) {});

    alive.clear();
    for (std::uint64_t i = 0; i < n_particles; ++i)
      if (pos[i] > 0.0) alive.push_back(i);
    const std::uint64_t killed = n_particles - alive.size();
    out.kills.push_back(killed);
    if (alive.empty())
      throw Error(ErrorKind::Extinction, "every particle was killed at step " + std::to_string(step));
    if (killed > 0) {
      RandomStream stream = RandomStream::substream(seed, {kResampleTag, static_cast<std::uint64_t>(step)});
      for (std::uint64_t i = 0; i < n_particles; ++i)
        if (!(pos[i] > 0.0)) pos[i] = pos[alive[stream.below(alive.size())]];
    }
    if (step >= options.burn_in) log_fractions.push_back(std::log(out.survival_fraction(step)));
  }

  const auto k = static_cast<double>(log_fractions.size());
  const double mean = std::accumulate(log_fractions.begin(), log_fractions.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : log_fractions) ss += (v - mean) * (v - mean);
  out.lambda_hat = -mean;
  out.stderr_ = k > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
  return out;
}

std::vector<double> histogram(const std::vector<double>& sample, const std::vector<double>& edges) {
  std::vector<double> h(edges.size(), 0.0);
  if (sample.empty()) return h;
  for (double x : sample) {
    if (x < edges.front()) continue;
    const auto k = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()) - 1;
    h[k] += 1.0;
  }
  for (double& v : h) v /= static_cast<double>(sample.size());
  return h;
}

namespace {

struct Cell {
  double lo;
  double hi;
  double mass;
};

std::vector<Cell> nu_cells(const EigenTriple& triple, const Grid& grid) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = triple.nu[static_cast<Eigen::Index>(i)];
    if (!cells.empty() && cells.back().lo == grid.cell_lo[i]) {
      cells.back().mass += m;
    } else {
      cells.push_back({grid.cell_lo[i], grid.cell_hi[i], m});
    }
  }
  return cells;
}

}  // namespace

std::vector<double> nu_bin_masses(const EigenTriple& triple, const Grid& grid, const std::vector<double>& edges) {
  std::vector<double> out(edges.size(), 0.0);
  for (const Cell& c : nu_cells(triple, grid)) {
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double lo = std::max(c.lo, edges[k]);
      const double hi = k + 1 < edges.size() ? std::min(c.hi, edges[k + 1]) : c.hi;
      if (hi > lo) out[k] += c.mass * (hi - lo) / (c.hi - c.lo);
    }
  }
  return out;
}

double kolmogorov_distance(std::vector<double> sample, const EigenTriple& triple, const Grid& grid) {
  if (sample.empty()) throw Error(ErrorKind::DegenerateConditioning, "empty sample");
  std::sort(sample.begin(), sample.end());
  const std::vector<Cell> cells = nu_cells(triple, grid);
  double total = 0.0;
  for (const Cell& c : cells) total += c.mass;
  const auto n = static_cast<double>(sample.size());
  double worst = 0.0;
  double below = 0.0;  // nu-mass of the cells left of the current one
  std::size_t ci = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double x = sample[i];
    while (ci < cells.size() && cells[ci].hi <= x) below += cells[ci++].mass;
    double F = below;
    if (ci < cells.size() && x > cells[ci].lo) F += cells[ci].mass * (x - cells[ci].lo) / (cells[ci].hi - cells[ci].lo);
    F /= total;
    worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - F), std::abs(static_cast<double>(i) / n - F)});
  }
  return worst;
}

std::string HeavyTailProbe::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "n,p_hat,weighted_partial_sum\n";
  for (std::size_t n = 0; n < curve.size(); ++n) os << n << ',' << curve.p_hat[n] << ',' << weighted_partial_sum[n] << '\n';
  return os.str();
}

HeavyTailProbe heavy_tail_summability_probe(const ChainParams& params, double M, long n_max, std::uint64_t n_paths,
                                            std::uint64_t seed, std::pair<long, long> window, unsigned threads) {
  validate(params);
  const TailInfo tail = classify_tail(params.innovation, params.a);
  if (tail.tail_class != TailClass::RegularlyVarying)
    throw Error(ErrorKind::InvalidModel, "the probe needs regularly varying innovations");
  if (!(M >= 0.0)) throw Error(ErrorKind::OutOfRange, "M must be nonnegative");

  HeavyTailProbe probe;
  probe.M = M;
  probe.tail_index = tail.tail_index;
  probe.a = params.a;
  probe.target = -tail.tail_index * std::log(params.a);
  SimOptions opts;
  opts.level = M;
  opts.threads = threads;
  probe.curve = survival_curve_mc(params, M, n_max, n_paths, seed, opts);

  double s = 0.0, s_lo = 0.0, s_hi = 0.0;
  for (std::size_t n = 0; n < probe.curve.size(); ++n) {
    const double w = std::pow(params.a, -tail.tail_index * static_cast<double>(n));
    s += w * probe.curve.p_hat[n];
    s_lo += w * probe.curve.ci_lo[n];
    s_hi += w * probe.curve.ci_hi[n];
    probe.weighted_partial_sum.push_back(s);
    probe.weighted_lo.push_back(s_lo);
    probe.weighted_hi.push_back(s_hi);
  }

  probe.slope = lambda_from_slope(probe.curve, window);
  probe.slope_within_20pct = std::abs(probe.slope.lambda_hat - probe.target) <= 0.2 * probe.target;

  const auto [n_lo, n_hi] = window;
  bool nonincreasing = true;
  auto term = [&](long n) {
    return std::pow(params.a, -tail.tail_index * static_cast<double>(n)) * probe.curve.p_hat[static_cast<std::size_t>(n)];
  };
  for (long n = n_lo + 1; n <= n_hi; ++n)
    if (term(n) > term(n - 1)) nonincreasing = false;
  probe.weighted_terms_nonincreasing = nonincreasing;
  const double total = probe.weighted_partial_sum[static_cast<std::size_t>(n_hi)];
  const double before = probe.weighted_partial_sum[static_cast<std::size_t>(n_lo)];
  probe.partial_sums_flatten = total > 0.0 && (total - before) / total < 0.05;
  probe.lower_bound_ratio = 1.05 / params.a;
  probe.lower_bound_ordering = probe.slope.lambda_hat <= tail.tail_index * std::log(probe.lower_bound_ratio);
  probe.note =
      "Monte Carlo cannot certify summability; the flags describe the window only and deep-tail counts are noisy.";
  return probe;
}

}  // namespace persist

#include "persist/renewal.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "persist/errors.hpp"
#include "persist/linalg.hpp"

namespace persist {

namespace {

double block_radius(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.size() == 0) return 0.0;
  const PerronRoot pr = perron_root(m);
  // the upper Collatz-Wielandt bound is the conservative choice for validity
  return pr.converged ? pr.radius : pr.upper;
}

}  // namespace

RenewalOperator::RenewalOperator(const KernelBlocks& blocks) : blocks_(&blocks) {
  if (blocks.n_a() < 1 || blocks.n_b() < 1)
    throw Error(ErrorKind::InvalidSplit, "renewal split needs nodes on both sides of r");
  radius_A_ = block_radius(blocks.Q_AA());
  radius_B_grid_ = block_radius(blocks.Q_BB());
  radius_B_ = radius_B_grid_;
  const TailInfo tail = classify_tail(blocks.params.innovation, blocks.params.a);
  if (tail.tail_class == TailClass::RegularlyVarying) {
    radius_B_ = std::max(radius_B_, std::pow(blocks.params.a, tail.tail_index));
  }
}

RenewalSystem RenewalOperator::assemble(double lambda) const {
  const KernelBlocks& b = *blocks_;
  const double z = std::exp(lambda);
  RenewalSystem s;
  s.lambda = lambda;
  s.valid_A = z * radius_A_ < 1.0;
  s.valid_B = z * radius_B_ < 1.0;
  if (!s.valid_A)
    throw Error(ErrorKind::SeriesDiverges, "A: e^lambda * r(Q_AA) >= 1 at lambda = " + std::to_string(lambda));
  if (!s.valid_B)
    throw Error(ErrorKind::SeriesDiverges, "B: e^lambda * r(Q_BB) >= 1 at lambda = " + std::to_string(lambda));

  const Eigen::Index na = b.n_a();
  const Eigen::Index nb = b.n_b();
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_a(Eigen::MatrixXd::Identity(na, na) - z * b.Q_AA());
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_b(Eigen::MatrixXd::Identity(nb, nb) - z * b.Q_BB());

  // R_B [kill_B | Q_BA] in one solve, then R_A Q_AB applied to it
  Eigen::MatrixXd rhs_b(nb, na + 1);
  rhs_b.col(0) = b.kill_B();
  rhs_b.rightCols(na) = b.Q_BA();
  const Eigen::MatrixXd after_b = lu_b.solve(rhs_b);
  Eigen::MatrixXd rhs_a(na, na + 1);
  rhs_a = z * z * (b.Q_AB() * after_b);
  rhs_a.col(0) += z * b.kill_A();
  const Eigen::MatrixXd sol = lu_a.solve(rhs_a);

  s.F = sol.col(0).cwiseMax(0.0);
  s.K = sol.rightCols(na).cwiseMax(0.0);
  const PerronRoot pr = perron_root(s.K);
  s.spectral_radius_K = pr.radius;
  s.radius_K_lower = pr.lower;
  s.radius_K_upper = pr.upper;
  return s;
}

RenewalSystem assemble(const KernelBlocks& blocks, double lambda) { return RenewalOperator(blocks).assemble(lambda); }

Eigen::VectorXd solve_renewal(const RenewalSystem& system) {
  if (std::abs(system.spectral_radius_K - 1.0) < 1e-10)
    throw Error(ErrorKind::SingularAtRoot, "r(K) is within 1e-10 of 1: lambda sits on the pole");
  const Eigen::Index n = system.K.rows();
  return Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd::Identity(n, n) - system.K).solve(system.F);
}

namespace {

// +1 when r(K) > 1, -1 when r(K) < 1, decided by the Collatz-Wielandt bracket
// whenever it excludes 1.
int side_of_one(const RenewalSystem& s) {
  if (s.radius_K_lower > 1.0) return 1;
  if (s.radius_K_upper < 1.0) return -1;
  return s.spectral_radius_K >= 1.0 ? 1 : -1;
}

}  // namespace

std::pair<double, double> default_bracket(const RenewalOperator& op) {
  const double limit = std::min(op.lambda_limit_A(), op.lambda_limit_B());
  return {0.0, limit - 1e-9 * std::max(1.0, limit)};
}

RootResult find_lambda_root(const KernelBlocks& blocks, std::pair<double, double> bracket, double tol) {
  auto [lo, hi] = bracket;
  if (!(lo < hi)) throw Error(ErrorKind::BadBracket, "bracket must satisfy lo < hi");
  const RenewalOperator op(blocks);
  RootResult out;

  auto evaluate = [&](double lambda) {
    const RenewalSystem s = op.assemble(lambda);
    out.trace.push_back({lambda, s.spectral_radius_K, s.valid_A, s.valid_B});
    return side_of_one(s);
  };
  auto evaluate_endpoint = [&](double lambda) {
    try {
      return evaluate(lambda);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SeriesDiverges)
        throw Error(ErrorKind::DomainExceeded, "bracket endpoint outside the validity domain (" + std::string(e.what()) + ")");
      throw;
    }
  };

  if (evaluate_endpoint(lo) >= 0) throw Error(ErrorKind::BadBracket, "r(K) >= 1 at the lower end of the bracket");
  if (evaluate_endpoint(hi) <= 0) throw Error(ErrorKind::BadBracket, "r(K) <= 1 at the upper end of the bracket");

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (evaluate(mid) > 0 ? hi : lo) = mid;
    ++out.iterations;
  }
  out.lo = lo;
  out.hi = hi;
  out.lambda_star = 0.5 * (lo + hi);
  return out;
}

std::string renewal_trace_csv(const RootResult& root) {
  std::ostringstream os;
  os.precision(17);
  os << "lambda,rho_K,valid_A,valid_B\n";
  for (const auto& p : root.trace) {
    os << p.lambda << ',' << p.rho_K << ',' << (p.valid_A ? 1 : 0) << ',' << (p.valid_B ? 1 : 0) << '\n';
  }
  return os.str();
}

double coming_down_bound(const ChainParams& params, double r, double A_ratio, double lambda, double x0) {
  validate(params);
  if (!(A_ratio > 1.0 && A_ratio < 1.0 / params.a))
    throw Error(ErrorKind::InvalidRatio, "A must lie in (1, 1/a)");
  if (!(r > 0.0) || x0 < r) throw Error(ErrorKind::OutOfRange, "need x0 >= r > 0");
  if (!classify_tail(params.innovation, params.a).all_power_moments)
    throw Error(ErrorKind::InvalidModel, "the bound needs every power moment of the positive part");
  return 2.0 * std::exp(lambda) * std::pow(x0 / r, lambda / std::log(A_ratio));
}

ComingDownEstimate coming_down_mc(const ChainParams& params, double r, double lambda, double x0, std::uint64_t n_paths,
                                  std::uint64_t seed, long horizon, unsigned threads) {
  validate(params);
  if (n_paths < 2) throw Error(ErrorKind::InvalidConfig, "need at least two paths");
  struct Acc {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t done = 0;
    std::uint64_t censored = 0;
  };
  const double a = params.a;
  const Acc total = detail::for_blocks(
      n_paths, std::uint64_t{1} << 14, threads, Acc{},
      [&](std::uint64_t block, std::uint64_t count, Acc& acc) {
        RandomStream stream = RandomStream::substream(seed, {block});
        for (std::uint64_t p = 0; p < count; ++p) {
          double x = x0;
          long k = 1;
          for (; k <= horizon; ++k) {
            x = a * x + sample(params.innovation, stream);
            if (x <= r) break;
          }
          if (k > horizon) {
            ++acc.censored;
            continue;
          }
          const double w = std::exp(lambda * static_cast<double>(k));
          acc.sum += w;
          acc.sum_sq += w * w;
          ++acc.done;
        }
      },
      [](Acc& into, const Acc& from) {
        into.sum += from.sum;
        into.sum_sq += from.sum_sq;
        into.done += from.done;
        into.censored += from.censored;
      });

  ComingDownEstimate est;
  est.censored = total.censored;
  if (total.done < 2) throw Error(ErrorKind::DegenerateConditioning, "fewer than two paths reached the level");
  const auto m = static_cast<double>(total.done);
  est.mean = total.sum / m;
  const double var = std::max(0.0, (total.sum_sq - m * est.mean * est.mean) / (m - 1.0));
  est.stderr_ = std::sqrt(var / m);
  est.ci_lo = est.mean - 1.959963984540054 * est.stderr_;
  est.ci_hi = est.mean + 1.959963984540054 * est.stderr_;
  return est;
}

}  // namespace persist

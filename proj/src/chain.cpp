#include "persist/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parallel.hpp"
#include "persist/errors.hpp"

namespace persist {

namespace {

std::vector<std::uint64_t>& operator+=(std::vector<std::uint64_t>& lhs, const std::vector<std::uint64_t>& rhs) {
  for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] += rhs[i];
  return lhs;
}

// Death-time histogram for one block of paths: slot k counts paths with
// T = k (k = 1..n_max); slot 0 counts paths still alive at n_max.
template <class Model>
void survival_block(const Model& model, double a, double x0, double level, long n_max, std::uint64_t count,
                    RandomStream& stream, std::vector<std::uint64_t>& deaths) {
  for (std::uint64_t p = 0; p < count; ++p) {
    double x = x0;
    long k = 1;
    for (; k <= n_max; ++k) {
      x = a * x + quantile(model, stream.uniform());
      if (x <= level) break;
    }
    if (k <= n_max) {
      ++deaths[static_cast<std::size_t>(k)];
    } else {
      ++deaths[0];
    }
  }
}

}  // namespace

void validate(const ChainParams& params) {
  if (!(params.a > 0.0 && params.a < 1.0)) throw Error(ErrorKind::InvalidModel, "a must lie in (0,1)");
  validate(params.innovation);
}

std::pair<TrajectorySample, StoppingRecord> simulate_to_stop(const ChainParams& params, double x0, long horizon,
                                                             RandomStream& stream, double r) {
  validate(params);
  if (horizon < 1) throw Error(ErrorKind::OutOfRange, "horizon must be >= 1");
  TrajectorySample traj;
  traj.x0 = x0;
  traj.path.push_back(x0);
  StoppingRecord rec;
  rec.horizon = horizon;
  const std::uint64_t before = stream.draws();
  double x = x0;
  for (long k = 1; k <= horizon; ++k) {
    x = params.a * x + sample(params.innovation, stream);
    traj.path.push_back(x);
    if (!rec.t_r && x <= r) rec.t_r = k;
    if (!rec.sigma_r && x > r) rec.sigma_r = k;
    if (x <= 0.0) {
      rec.t0 = k;
      break;
    }
  }
  rec.censored = !rec.t0.has_value();
  traj.innovations_used = stream.draws() - before;
  return {std::move(traj), rec};
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // the closed form lands a few ulps off the endpoints at p = 0 and p = 1
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

SurvivalCurve SurvivalCurve::from_counts(double x0, double level, std::vector<std::uint64_t> survivors,
                                         std::uint64_t n_paths, std::uint64_t seed) {
  SurvivalCurve c;
  c.x0 = x0;
  c.level = level;
  c.n_paths = n_paths;
  c.seed = seed;
  c.survivors = std::move(survivors);
  for (std::size_t n = 0; n < c.survivors.size(); ++n) {
    c.n_grid.push_back(static_cast<long>(n));
    c.p_hat.push_back(static_cast<double>(c.survivors[n]) / static_cast<double>(n_paths));
    auto [lo, hi] = wilson_interval(c.survivors[n], n_paths);
    c.ci_lo.push_back(std::min(lo, c.p_hat.back()));
    c.ci_hi.push_back(std::max(hi, c.p_hat.back()));
  }
  return c;
}

std::string SurvivalCurve::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "n,survivors,paths,p_hat,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < size(); ++i)
    os << n_grid[i] << ',' << survivors[i] << ',' << n_paths << ',' << p_hat[i] << ',' << ci_lo[i] << ',' << ci_hi[i]
       << '\n';
  return os.str();
}

SurvivalCurve survival_curve_mc(const ChainParams& params, double x0, long n_max, std::uint64_t n_paths,
                                std::uint64_t master_seed, const SimOptions& options) {
  validate(params);
  if (n_paths < 100) throw Error(ErrorKind::OutOfRange, "survival_curve_mc needs at least 100 paths");
  if (n_max < 1) throw Error(ErrorKind::OutOfRange, "n_max must be >= 1");
  const auto slots = static_cast<std::size_t>(n_max + 1);

  auto deaths = detail::for_blocks(
      n_paths, options.block_size, options.threads, std::vector<std::uint64_t>(slots, 0),
      [&](std::uint64_t block, std::uint64_t count, std::vector<std::uint64_t>& acc) {
        RandomStream stream = RandomStream::substream(master_seed, {block});
        std::visit([&](const auto& m) { survival_block(m, params.a, x0, options.level, n_max, count, stream, acc); },
                   params.innovation);
      },
      [](std::vector<std::uint64_t>& total, const std::vector<std::uint64_t>& part) { total += part; });

  // survivors[n] = paths with T > n.
  std::vector<std::uint64_t> survivors(slots, 0);
  std::uint64_t alive = n_paths;
  survivors[0] = alive;
  for (std::size_t n = 1; n < slots; ++n) {
    alive -= deaths[n];
    survivors[n] = alive;
  }
  return SurvivalCurve::from_counts(x0, options.level, std::move(survivors), n_paths, master_seed);
}

std::vector<double> ConditionalLaw::conditional_masses() const {
  std::vector<double> m(counts.size(), 0.0);
  if (survivors == 0) return m;
  for (std::size_t k = 0; k < counts.size(); ++k) m[k] = static_cast<double>(counts[k]) / static_cast<double>(survivors);
  return m;
}

std::pair<double, double> ConditionalLaw::conditional_exceedance(std::size_t k) const {
  std::uint64_t above = 0;
  for (std::size_t i = k; i < counts.size(); ++i) above += counts[i];
  const double n_s = static_cast<double>(survivors);
  const double p = survivors ? static_cast<double>(above) / n_s : 0.0;
  return {p, survivors ? std::sqrt(p * (1.0 - p) / n_s) : 1.0};
}

std::pair<double, double> ConditionalLaw::unconditional_exceedance(std::size_t k) const {
  if (!has_unconditional) throw Error(ErrorKind::OutOfRange, "unconditional law was not tracked");
  std::uint64_t above = 0;
  for (std::size_t i = k + 1; i < unconditional_counts.size(); ++i) above += unconditional_counts[i];
  const double n = static_cast<double>(n_paths);
  const double p = static_cast<double>(above) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

ConditionalLaw conditional_law_mc(const ChainParams& params, double x0, long n, std::span<const double> edges,
                                  std::uint64_t n_paths, std::uint64_t master_seed, const ConditionalOptions& options) {
  validate(params);
  if (edges.empty() || !std::is_sorted(edges.begin(), edges.end()))
    throw Error(ErrorKind::OutOfRange, "bin edges must be a nonempty ascending sequence");
  if (n < 0) throw Error(ErrorKind::OutOfRange, "n must be >= 0");

  const std::size_t nb = edges.size();
  auto bin_of = [&](double x) -> std::size_t {
    // index of the last edge <= x; callers guarantee x >= edges.front()
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()) - 1;
  };

  struct Acc {
    std::vector<std::uint64_t> cond;
    std::vector<std::uint64_t> uncond;
    std::uint64_t survivors = 0;
  };
  Acc init{std::vector<std::uint64_t>(nb, 0), std::vector<std::uint64_t>(nb + 1, 0), 0};

  const double a = params.a;
  const bool track = options.track_unconditional;
  Acc total = detail::for_blocks(
      n_paths, options.block_size, options.threads, init,
      [&](std::uint64_t block, std::uint64_t count, Acc& acc) {
        RandomStream stream = RandomStream::substream(master_seed, {block});
        for (std::uint64_t p = 0; p < count; ++p) {
          double x = x0;
          bool alive = true;
          for (long k = 1; k <= n; ++k) {
            x = a * x + sample(params.innovation, stream);
            if (x <= 0.0) {
              alive = false;
              if (!track) break;
            }
          }
          if (alive) {
            ++acc.survivors;
            if (x >= edges.front()) ++acc.cond[bin_of(x)];
          }
          if (track) {
            if (x < edges.front()) {
              ++acc.uncond[0];
            } else {
              ++acc.uncond[bin_of(x) + 1];
            }
          }
        }
      },
      [](Acc& t, const Acc& part) {
        t.cond += part.cond;
        t.uncond += part.uncond;
        t.survivors += part.survivors;
      });

  if (total.survivors < options.min_survivors) {
    throw Error(ErrorKind::DegenerateConditioning,
                "only " + std::to_string(total.survivors) + " survivors at n=" + std::to_string(n) + " (need " +
                    std::to_string(options.min_survivors) + ")");
  }
  ConditionalLaw law;
  law.n = n;
  law.edges.assign(edges.begin(), edges.end());
  law.counts = std::move(total.cond);
  law.survivors = total.survivors;
  law.n_paths = n_paths;
  law.has_unconditional = track;
  if (track) law.unconditional_counts = std::move(total.uncond);
  return law;
}

long stationary_truncation(const ChainParams& params, double tolerance) {
  validate(params);
  if (!(tolerance > 0.0)) throw Error(ErrorKind::OutOfRange, "tolerance must be positive");
  const double iqr = interquartile_range(params.innovation);
  // a^K * iqr / (1-a) < tolerance
  const double k = std::log(tolerance * (1.0 - params.a) / iqr) / std::log(params.a);
  return std::max(1L, static_cast<long>(std::floor(k)) + 1);
}

double stationary_sample(const ChainParams& params, double tolerance, RandomStream& stream) {
  const long terms = stationary_truncation(params, tolerance);
  double sum = 0.0;
  double w = 1.0;
  for (long k = 1; k <= terms; ++k) {
    sum += w * sample(params.innovation, stream);
    w *= params.a;
  }
  return sum;
}

}  // namespace persist

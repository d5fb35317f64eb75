#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "persist/innovations.hpp"
#include "persist/random.hpp"

namespace persist {

// X_n = a X_{n-1} + xi_n with 0 < a < 1.
struct ChainParams {
  double a = 0.5;
  InnovationModel innovation = Gaussian{};
};

void validate(const ChainParams& params);

struct StoppingRecord {
  std::optional<long> t0;       // first k >= 1 with X_k <= 0
  std::optional<long> t_r;      // first k >= 1 with X_k <= r
  std::optional<long> sigma_r;  // first k >= 1 with X_k > r
  long horizon = 0;
  bool censored = false;        // T_0 > horizon
};

struct TrajectorySample {
  double x0 = 0.0;
  std::vector<double> path;  // path[0] = x0
  std::uint64_t innovations_used = 0;
};

// Runs the chain from x0 until T_0 or the horizon, whichever comes first.
// Stopping times for the level r are recorded along the way.
std::pair<TrajectorySample, StoppingRecord> simulate_to_stop(const ChainParams& params, double x0, long horizon,
                                                             RandomStream& stream, double r = 0.0);

struct SimOptions {
  double level = 0.0;             // absorbing level; 0 gives T_0, M gives T_M
  unsigned threads = 1;
  std::uint64_t block_size = 1u << 14;
};

// Monte Carlo estimate of P_x(T > n), n = 0..n_max, with Wilson 95% intervals.
struct SurvivalCurve {
  double x0 = 0.0;
  double level = 0.0;
  std::vector<long> n_grid;
  std::vector<std::uint64_t> survivors;
  std::vector<double> p_hat;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;

  // Builds p_hat and Wilson intervals from survivor counts.
  static SurvivalCurve from_counts(double x0, double level, std::vector<std::uint64_t> survivors,
                                   std::uint64_t n_paths, std::uint64_t seed);
  [[nodiscard]] std::size_t size() const { return p_hat.size(); }
  [[nodiscard]] std::string to_csv() const;
};

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

SurvivalCurve survival_curve_mc(const ChainParams& params, double x0, long n_max, std::uint64_t n_paths,
                                std::uint64_t master_seed, const SimOptions& options = {});

// Law of X_n on T_0 > n, histogrammed over [edges[k], edges[k+1]) with a final
// open bin [edges.back(), inf). Optionally also the unconditioned law of X_n
// over the same bins (plus a bin for X_n < edges.front()).
struct ConditionalLaw {
  long n = 0;
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;  // survivors per bin, size edges.size()
  std::uint64_t survivors = 0;
  std::uint64_t n_paths = 0;
  bool has_unconditional = false;
  std::vector<std::uint64_t> unconditional_counts;  // size edges.size() + 1; slot 0 is below edges.front()

  [[nodiscard]] std::vector<double> conditional_masses() const;
  // P(X_n >= edges[k] | T_0 > n) and its standard error.
  [[nodiscard]] std::pair<double, double> conditional_exceedance(std::size_t k) const;
  // P(X_n >= edges[k]) and its standard error.
  [[nodiscard]] std::pair<double, double> unconditional_exceedance(std::size_t k) const;
  [[nodiscard]] std::uint64_t effective_sample_size() const { return survivors; }
};

struct ConditionalOptions {
  bool track_unconditional = false;
  unsigned threads = 1;
  std::uint64_t block_size = 1u << 14;
  std::uint64_t min_survivors = 50;
};

ConditionalLaw conditional_law_mc(const ChainParams& params, double x0, long n, std::span<const double> edges,
                                  std::uint64_t n_paths, std::uint64_t master_seed,
                                  const ConditionalOptions& options = {});

// Truncated series sum_{k<=K} a^{k-1} xi_k with a^K * IQR / (1-a) < tolerance.
double stationary_sample(const ChainParams& params, double tolerance, RandomStream& stream);
long stationary_truncation(const ChainParams& params, double tolerance);

}  // namespace persist

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "persist/chain.hpp"
#include "persist/kernel.hpp"
#include "persist/spectral.hpp"

namespace persist {

struct SlopeEstimate {
  double lambda_hat = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
  long n_lo = 0;
  long n_hi = 0;
  bool generalized = false;  // false: ordinary least squares (no path count to model the noise)
};

// Fits -log p_n = c + lambda n over n_lo..n_hi. With a path count the noise is
// modelled as nested binomial, Cov(log p_m, log p_n) = (1 - p_m) / (N p_m) for
// m <= n, and the fit is generalized least squares; otherwise ordinary least
// squares with the residual variance. Throws EmptyWindow when fewer than five
// points are available or some p_n in the window is 0.
SlopeEstimate lambda_from_slope(const SurvivalCurve& curve, std::pair<long, long> window);

struct FvOptions {
  long burn_in = 100;
  unsigned threads = 1;
  std::uint64_t block_size = 1024;
  double stationary_tolerance = 1e-12;
};

struct FvResult {
  double lambda_hat = 0.0;
  double stderr_ = 0.0;  // from the spread of per-step log survival fractions
  std::uint64_t n_particles = 0;
  long steps = 0;
  long burn_in = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> kills;     // per step
  std::vector<double> positions;        // after the last step, all > 0
  [[nodiscard]] double survival_fraction(long step) const;
  [[nodiscard]] std::string trace_csv() const;
};

// Fixed-population resampling: every step moves all particles once; each
// particle at or below 0 is replaced by a uniformly chosen survivor. The
// per-step survival fraction after burn-in estimates e^{-lambda_a}. Particle
// moves draw from per-(step, block) substreams and resampling from a stream of
// its own, so the result does not depend on the thread count. Throws
// Extinction when a step kills every particle.
FvResult fleming_viot(const ChainParams& params, std::uint64_t n_particles, long n_steps, std::uint64_t seed,
                      const FvOptions& options = {});

// Fraction of the sample in each bin [edges[k], edges[k+1]) (last bin open).
std::vector<double> histogram(const std::vector<double>& sample, const std::vector<double>& edges);

// sup_x |F_sample(x) - F_nu(x)| where F_nu spreads each cell's nu-mass evenly
// over the cell.
double kolmogorov_distance(std::vector<double> sample, const EigenTriple& triple, const Grid& grid);

// nu-mass of [edges[k], edges[k+1]) (last bin open), cells split proportionally.
std::vector<double> nu_bin_masses(const EigenTriple& triple, const Grid& grid, const std::vector<double>& edges);

struct HeavyTailProbe {
  double M = 0.0;
  double tail_index = 0.0;
  double a = 0.0;
  double target = 0.0;  // -r log a
  SurvivalCurve curve;  // P_M(T_M > n)
  std::vector<double> weighted_partial_sum;  // sum_{k<=n} a^{-rk} p_k
  std::vector<double> weighted_lo;  // same with Wilson lower / upper ends
  std::vector<double> weighted_hi;
  SlopeEstimate slope;
  bool slope_within_20pct = false;
  bool weighted_terms_nonincreasing = false;  // a^{-rn} p_n over the window
  bool partial_sums_flatten = false;  // last window increment below 5% of the sum
  double lower_bound_ratio = 0.0;  // A in r log A, slightly above 1/a
  bool lower_bound_ordering = false;  // slope <= r log A
  std::string note;
  [[nodiscard]] std::string to_csv() const;
};

// Report only: nothing here is asserted. Throws InvalidModel unless the
// innovations are regularly varying.
HeavyTailProbe heavy_tail_summability_probe(const ChainParams& params, double M, long n_max, std::uint64_t n_paths,
                                            std::uint64_t seed, std::pair<long, long> window,
                                            unsigned threads = 1);

}  // namespace persist

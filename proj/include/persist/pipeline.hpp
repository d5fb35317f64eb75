#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "persist/chain.hpp"
#include "persist/kernel.hpp"
#include "persist/spectral.hpp"

namespace persist {

struct GridSettings {
  std::optional<double> r;
  std::optional<double> cap;
  std::size_t n_nodes = 400;
  QuadratureScheme scheme = QuadratureScheme::Midpoint;
  OverflowPolicy policy = OverflowPolicy::Kill;
  double overflow_tol = 1e-10;
  // r is raised until e^{lambda_hat + lambda_pad} r(Q_BB) < margin
  double margin = 0.9;
  double lambda_pad = 0.1;
};

struct SpectrumPlan {
  double r = 0.0;
  double cap = 0.0;
  std::size_t n_nodes = 0;
  QuadratureScheme scheme = QuadratureScheme::Midpoint;
  OverflowPolicy policy = OverflowPolicy::Kill;
  bool bounded = false;
  double lambda_estimate = 0.0;  // from the coarse pilot grid
  double scaled_radius_B = 0.0;  // e^{lambda_estimate + pad} r(Q_BB) on the pilot grid
  bool margin_met = false;
  std::vector<std::string> notes;
};

// Refuses models the spectral pipeline cannot handle: DegenerateKernel when
// xi never kills or is never positive, SeriesDiverges for regularly varying
// innovations (the excursion series above r has no exponential moment).
void require_spectral_model(const ChainParams& params);

// Picks r and cap. Bounded innovations: cap = R_* and r = R_*(1 - 2^-k);
// otherwise r grows geometrically from the interquartile range and cap is the
// smallest 2^k r with overflow below overflow_tol.
SpectrumPlan plan_spectrum(const ChainParams& params, const GridSettings& settings);

Grid plan_grid(const ChainParams& params, const SpectrumPlan& plan);
KernelBlocks plan_blocks(const ChainParams& params, const SpectrumPlan& plan);

struct ConvergenceRow {
  double cap = 0.0;
  std::size_t n_nodes = 0;
  OverflowPolicy policy = OverflowPolicy::Kill;
  double lambda_a = 0.0;
  double max_overflow = 0.0;
};

// lambda_a for both overflow policies at (cap, n), (cap, 2n) and, for
// unbounded innovations, (2 cap, 2n).
std::vector<ConvergenceRow> convergence_trace(const ChainParams& params, const SpectrumPlan& plan, double tol = 1e-10);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

}  // namespace persist

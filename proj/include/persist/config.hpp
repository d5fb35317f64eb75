#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "persist/chain.hpp"
#include "persist/pipeline.hpp"

namespace persist {

// Run configuration, read from JSON (comments allowed). Every section is
// optional; unknown keys anywhere are rejected with InvalidConfig.
//
//   {
//     "chain":    { "a": 0.5, "innovation": { "kind": "gaussian", "mean": 0, "std": 1 } },
//     "fixture":  "two_state",          // replaces chain/grid for spectrum and renewal
//     "grid":     { "r": 3, "cap": 40, "n_nodes": 400, "scheme": "midpoint", "policy": "kill",
//                   "overflow_tol": 1e-10, "margin": 0.9, "lambda_pad": 0.1, "blocks_file": "blocks.bin" },
//     "spectral": { "tol": 1e-10, "max_iter": 100000, "convergence_trace": true },
//     "renewal":  { "bracket": [0, 0.5], "tol": 1e-10 },
//     "mc":       { "x0": 1, "n_max": 30, "n_paths": 1000000, "level": 0, "window": [10, 30] },
//     "fv":       { "n_particles": 10000, "n_steps": 500, "burn_in": 100 },
//     "oracle":   { "kind": "laplace", "a": 0.5, "tail_index": 1 },
//     "compare":  { "renewal_abs": 1e-6, "slope_sigmas": 3, "fv_rel": 0.05 },
//     "seed": 1, "threads": 1, "out": "out"
//   }
struct SpectralSettings {
  double tol = 1e-10;
  int max_iter = 100000;
  bool convergence_trace = true;
};

struct RenewalSettings {
  std::optional<std::pair<double, double>> bracket;
  double tol = 1e-10;
};

struct McSettings {
  double x0 = 1.0;
  long n_max = 30;
  std::uint64_t n_paths = 1000000;
  double level = 0.0;
  std::pair<long, long> window{10, 30};
};

struct FvSettings {
  std::uint64_t n_particles = 10000;
  long n_steps = 500;
  long burn_in = 100;
};

struct OracleSettings {
  std::string kind = "laplace";  // laplace | gaussian | pareto | two_state
  std::optional<double> a;       // defaults to chain.a
  double tail_index = 1.0;
};

struct CompareBudgets {
  double renewal_abs = 1e-6;
  double slope_sigmas = 3.0;
  double fv_rel = 0.05;
};

struct RunConfig {
  ChainParams chain;
  bool two_state_fixture = false;
  GridSettings grid;
  std::optional<std::string> blocks_file;
  SpectralSettings spectral;
  RenewalSettings renewal;
  McSettings mc;
  FvSettings fv;
  OracleSettings oracle;
  CompareBudgets compare;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = "out";
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

// Reads and validates a config file. Throws InvalidConfig on syntax errors.
RunConfig load_config(const std::string& path);

}  // namespace persist

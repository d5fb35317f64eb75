#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "persist/chain.hpp"
#include "persist/config.hpp"
#include "persist/errors.hpp"
#include "persist/estimators.hpp"
#include "persist/io.hpp"
#include "persist/oracles.hpp"
#include "persist/pipeline.hpp"
#include "persist/renewal.hpp"
#include "persist/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace persist;

namespace {

struct Context {
  RunConfig cfg;
  json cfg_json;
  fs::path out;
};

struct Kernel {
  KernelBlocks blocks;
  json plan;
};

Kernel kernel_for(const RunConfig& cfg) {
  if (cfg.two_state_fixture) return {finite_chain_oracle().blocks, {{"source", "two_state"}}};
  if (cfg.blocks_file) return {load_blocks(*cfg.blocks_file), {{"source", *cfg.blocks_file}}};
  const SpectrumPlan plan = plan_spectrum(cfg.chain, cfg.grid);
  json p{{"source", "grid"},
         {"r", plan.r},
         {"cap", plan.cap},
         {"n_nodes", plan.n_nodes},
         {"scheme", to_string(plan.scheme)},
         {"policy", to_string(plan.policy)},
         {"pilot_lambda", plan.lambda_estimate},
         {"scaled_radius_B", plan.scaled_radius_B},
         {"margin_met", plan.margin_met},
         {"notes", plan.notes}};
  return {plan_blocks(cfg.chain, plan), p};
}

EigenTriple spectrum_of(const RunConfig& cfg, const KernelBlocks& b) {
  return leading_eigentriple(b, cfg.spectral.tol, cfg.spectral.max_iter);
}

int cmd_spectrum(const Context& ctx) {
  const Kernel k = kernel_for(ctx.cfg);
  const EigenTriple t = spectrum_of(ctx.cfg, k.blocks);
  write_csv(ctx.out / "eigentriple.csv", eigentriple_csv(t, k.blocks.grid), ctx.cfg_json, ctx.cfg.seed);
  json scalars = eigentriple_scalars(t);
  scalars["harmonic_residual"] = harmonic_residual(t, k.blocks);
  scalars["quasi_stationarity_residual"] = quasi_stationarity_residual(t, k.blocks.Q);
  scalars["monotonicity_defect"] = monotonicity_defect(t.V);
  scalars["max_overflow"] = k.blocks.max_overflow();
  scalars["plan"] = k.plan;
  scalars["threads"] = ctx.cfg.threads;
  write_json(ctx.out / "scalars.json", scalars, ctx.cfg_json, ctx.cfg.seed);
  save_blocks(ctx.out / "blocks.bin", k.blocks);
  if (ctx.cfg.spectral.convergence_trace && k.plan.value("source", "") == "grid") {
    const SpectrumPlan plan = plan_spectrum(ctx.cfg.chain, ctx.cfg.grid);
    write_csv(ctx.out / "convergence.csv", convergence_csv(convergence_trace(ctx.cfg.chain, plan, ctx.cfg.spectral.tol)),
              ctx.cfg_json, ctx.cfg.seed);
  }
  std::cout << scalars.dump(2) << '\n';
  return 0;
}

int cmd_renewal(const Context& ctx) {
  const Kernel k = kernel_for(ctx.cfg);
  const auto bracket = ctx.cfg.renewal.bracket.value_or(default_bracket(RenewalOperator(k.blocks)));
  const RootResult root = find_lambda_root(k.blocks, bracket, ctx.cfg.renewal.tol);
  write_csv(ctx.out / "renewal_trace.csv", renewal_trace_csv(root), ctx.cfg_json, ctx.cfg.seed);
  const json body{{"lambda_star", root.lambda_star},
                  {"bracket", {root.lo, root.hi}},
                  {"iterations", root.iterations},
                  {"plan", k.plan},
                  {"threads", ctx.cfg.threads}};
  write_json(ctx.out / "root.json", body, ctx.cfg_json, ctx.cfg.seed);
  std::cout << body.dump(2) << '\n';
  return 0;
}

int cmd_mc(const Context& ctx) {
  const auto& mc = ctx.cfg.mc;
  SimOptions opts;
  opts.level = mc.level;
  opts.threads = ctx.cfg.threads;
  const SurvivalCurve curve = survival_curve_mc(ctx.cfg.chain, mc.x0, mc.n_max, mc.n_paths, ctx.cfg.seed, opts);
  write_csv(ctx.out / "survival.csv", curve.to_csv(), ctx.cfg_json, ctx.cfg.seed);
  json body{{"x0", mc.x0},
            {"level", mc.level},
            {"n_paths", mc.n_paths},
            {"survivors_at_n_max", curve.survivors.back()},
            {"p_hat_at_n_max", curve.p_hat.back()},
            {"threads", ctx.cfg.threads}};
  const SlopeEstimate slope = lambda_from_slope(curve, mc.window);
  body["lambda_hat"] = slope.lambda_hat;
  body["stderr"] = slope.stderr_;
  body["window"] = mc.window;
  const TailInfo tail = classify_tail(ctx.cfg.chain.innovation, ctx.cfg.chain.a);
  if (tail.tail_class == TailClass::RegularlyVarying) {
    const HeavyTailProbe probe = heavy_tail_summability_probe(ctx.cfg.chain, mc.level, mc.n_max, mc.n_paths,
                                                              ctx.cfg.seed, mc.window, ctx.cfg.threads);
    write_csv(ctx.out / "probe.csv", probe.to_csv(), ctx.cfg_json, ctx.cfg.seed);
    body["probe"] = {{"M", probe.M},
                     {"target", probe.target},
                     {"slope", probe.slope.lambda_hat},
                     {"slope_within_20pct", probe.slope_within_20pct},
                     {"weighted_terms_nonincreasing", probe.weighted_terms_nonincreasing},
                     {"partial_sums_flatten", probe.partial_sums_flatten},
                     {"lower_bound_ordering", probe.lower_bound_ordering},
                     {"note", probe.note}};
  }
  write_json(ctx.out / "mc.json", body, ctx.cfg_json, ctx.cfg.seed);
  std::cout << body.dump(2) << '\n';
  return 0;
}

int cmd_fv(const Context& ctx) {
  FvOptions opts;
  opts.burn_in = ctx.cfg.fv.burn_in;
  opts.threads = ctx.cfg.threads;
  const FvResult fv = fleming_viot(ctx.cfg.chain, ctx.cfg.fv.n_particles, ctx.cfg.fv.n_steps, ctx.cfg.seed, opts);
  write_csv(ctx.out / "fv_trace.csv", fv.trace_csv(), ctx.cfg_json, ctx.cfg.seed);
  double top = 0.0;
  for (double x : fv.positions) top = std::max(top, x);
  std::vector<double> edges;
  for (int k = 0; k < 20; ++k) edges.push_back(top * k / 20.0);
  const json body{{"lambda_hat", fv.lambda_hat},
                  {"stderr", fv.stderr_},
                  {"n_particles", fv.n_particles},
                  {"steps", fv.steps},
                  {"burn_in", fv.burn_in},
                  {"histogram_edges", edges},
                  {"histogram", histogram(fv.positions, edges)},
                  {"threads", ctx.cfg.threads}};
  write_json(ctx.out / "fv.json", body, ctx.cfg_json, ctx.cfg.seed);
  std::cout << body.dump(2) << '\n';
  return 0;
}

int cmd_oracle(const Context& ctx) {
  const auto& o = ctx.cfg.oracle;
  const double a = o.a.value_or(ctx.cfg.chain.a);
  json body{{"kind", o.kind}};
  if (o.kind == "laplace") {
    const LaplaceRoot root = laplace_lambda_a(a);
    body.update({{"a", a}, {"lambda_a", root.lambda_a}, {"s_star", root.s_star}, {"bracket", {root.s_lo, root.s_hi}}});
  } else if (o.kind == "gaussian") {
    const OuParams ou = gaussian_ou_params(a);
    body.update({{"a", a}, {"theta", ou.theta}, {"sigma_sq", ou.sigma_sq}});
  } else if (o.kind == "pareto") {
    body.update({{"a", a}, {"tail_index", o.tail_index}, {"lambda_a", pareto_lambda_a(o.tail_index, a)}});
  } else {
    const FiniteChainOracle f = finite_chain_oracle();
    body.update({{"rho", f.exact.rho}, {"lambda_a", f.exact.lambda_a}, {"renewal_root", f.renewal_root}});
  }
  write_json(ctx.out / "oracle.json", body, ctx.cfg_json, ctx.cfg.seed);
  std::cout << body.dump(2) << '\n';
  return 0;
}

int cmd_compare(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const Kernel k = kernel_for(cfg);
  const EigenTriple t = spectrum_of(cfg, k.blocks);
  const double lam = t.lambda_a;
  json body{{"spectral", {{"lambda_a", lam}, {"residual", t.residual}}}, {"plan", k.plan}, {"threads", cfg.threads}};
  bool all_pass = true;

  {
    const auto bracket = cfg.renewal.bracket.value_or(default_bracket(RenewalOperator(k.blocks)));
    const RootResult root = find_lambda_root(k.blocks, bracket, cfg.renewal.tol);
    const double delta = std::abs(root.lambda_star - lam);
    const bool pass = delta <= cfg.compare.renewal_abs;
    all_pass = all_pass && pass;
    body["renewal"] = {{"lambda_star", root.lambda_star}, {"delta", delta}, {"budget", cfg.compare.renewal_abs}, {"pass", pass}};
  }
  if (!cfg.two_state_fixture) {
    SimOptions opts;
    opts.threads = cfg.threads;
    const SurvivalCurve curve = survival_curve_mc(cfg.chain, cfg.mc.x0, cfg.mc.n_max, cfg.mc.n_paths, cfg.seed, opts);
    const SlopeEstimate s = lambda_from_slope(curve, cfg.mc.window);
    const double delta = std::abs(s.lambda_hat - lam);
    const bool pass = delta <= cfg.compare.slope_sigmas * s.stderr_;
    all_pass = all_pass && pass;
    body["slope"] = {{"lambda_hat", s.lambda_hat},
                     {"stderr", s.stderr_},
                     {"delta", delta},
                     {"budget", cfg.compare.slope_sigmas * s.stderr_},
                     {"pass", pass}};

    FvOptions fo;
    fo.burn_in = cfg.fv.burn_in;
    fo.threads = cfg.threads;
    const FvResult fv = fleming_viot(cfg.chain, cfg.fv.n_particles, cfg.fv.n_steps, cfg.seed, fo);
    const double rel = std::abs(fv.lambda_hat - lam) / lam;
    const bool fv_pass = rel <= cfg.compare.fv_rel;
    all_pass = all_pass && fv_pass;
    body["fv"] = {{"lambda_hat", fv.lambda_hat},
                  {"stderr", fv.stderr_},
                  {"relative_delta", rel},
                  {"budget", cfg.compare.fv_rel},
                  {"pass", fv_pass}};
  }
  body["all_pass"] = all_pass;
  write_json(ctx.out / "comparison.json", body, ctx.cfg_json, cfg.seed);
  std::cout << body.dump(2) << '\n';
  return 0;
}

int report(ErrorKind kind, const std::string& message) {
  const int code = exit_code(kind);
  const json err{{"error", std::string(to_string(kind))}, {"message", message}, {"exit_code", code}};
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistence exponents, quasi-stationary laws and harmonic functions of killed AR(1) chains"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "JSON run configuration (comments allowed)");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  const std::pair<const char*, int (*)(const Context&)> commands[] = {
      {"spectrum", cmd_spectrum}, {"renewal", cmd_renewal}, {"mc", cmd_mc},
      {"fv", cmd_fv},             {"oracle", cmd_oracle},   {"compare", cmd_compare}};
  const char* help[] = {"leading eigentriple of the discretized killed kernel",
                        "root of r(K_lambda) = 1 from the renewal decomposition",
                        "Monte Carlo survival curve and slope estimate",
                        "Fleming-Viot particle estimate",
                        "closed-form reference values",
                        "run every pipeline and check the deltas against budgets"};
  for (std::size_t i = 0; i < std::size(commands); ++i) app.add_subcommand(commands[i].first, help[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Context ctx;
    ctx.cfg = config_path.empty() ? config_from_json(json::object()) : load_config(config_path);
    if (seed) ctx.cfg.seed = *seed;
    if (threads) ctx.cfg.threads = *threads;
    if (out) ctx.cfg.out = *out;
    ctx.cfg_json = to_json(ctx.cfg);
    ctx.out = ctx.cfg.out;
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(ctx);
  } catch (const Error& e) {
    return report(e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report(ErrorKind::InvalidConfig, e.what());
  }
  return 2;
}

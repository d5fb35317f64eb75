#include "persist/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "persist/errors.hpp"

namespace persist {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, where + " must be a table");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || key == k;
    if (!known) throw Error(ErrorKind::InvalidConfig, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, const std::string& where, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::InvalidConfig, where + "." + key + " has the wrong type");
  }
}

template <class T>
void read(const json& j, const char* key, const std::string& where, std::optional<T>& into) {
  if (!j.contains(key)) return;
  T v{};
  read(j, key, where, v);
  into = v;
}

void positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw Error(ErrorKind::InvalidConfig, what + " must be positive");
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  only_keys(j, "config",
            {"chain", "fixture", "grid", "spectral", "renewal", "mc", "fv", "oracle", "compare", "seed", "threads", "out"});

  if (j.contains("chain")) {
    const json& c = j["chain"];
    only_keys(c, "chain", {"a", "innovation"});
    read(c, "a", "chain", cfg.chain.a);
    if (c.contains("innovation")) {
      try {
        cfg.chain.innovation = model_from_json(c["innovation"]);
      } catch (const Error& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("chain.innovation: ") + e.what());
      }
    }
  }
  validate(cfg.chain);

  if (j.contains("fixture")) {
    std::string f;
    read(j, "fixture", "config", f);
    if (f != "two_state") throw Error(ErrorKind::InvalidConfig, "unknown fixture '" + f + "'");
    cfg.two_state_fixture = true;
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    only_keys(g, "grid",
              {"r", "cap", "n_nodes", "scheme", "policy", "overflow_tol", "margin", "lambda_pad", "blocks_file"});
    read(g, "r", "grid", cfg.grid.r);
    read(g, "cap", "grid", cfg.grid.cap);
    read(g, "n_nodes", "grid", cfg.grid.n_nodes);
    read(g, "overflow_tol", "grid", cfg.grid.overflow_tol);
    read(g, "margin", "grid", cfg.grid.margin);
    read(g, "lambda_pad", "grid", cfg.grid.lambda_pad);
    read(g, "blocks_file", "grid", cfg.blocks_file);
    std::string s;
    read(g, "scheme", "grid", s);
    if (!s.empty()) cfg.grid.scheme = scheme_from_string(s);
    s.clear();
    read(g, "policy", "grid", s);
    if (!s.empty()) cfg.grid.policy = policy_from_string(s);
    if (cfg.grid.r) positive(*cfg.grid.r, "grid.r");
    if (cfg.grid.cap) positive(*cfg.grid.cap, "grid.cap");
    positive(cfg.grid.overflow_tol, "grid.overflow_tol");
  }

  if (j.contains("spectral")) {
    const json& s = j["spectral"];
    only_keys(s, "spectral", {"tol", "max_iter", "convergence_trace"});
    read(s, "tol", "spectral", cfg.spectral.tol);
    read(s, "max_iter", "spectral", cfg.spectral.max_iter);
    read(s, "convergence_trace", "spectral", cfg.spectral.convergence_trace);
    positive(cfg.spectral.tol, "spectral.tol");
    if (cfg.spectral.max_iter < 1) throw Error(ErrorKind::InvalidConfig, "spectral.max_iter must be positive");
  }

  if (j.contains("renewal")) {
    const json& r = j["renewal"];
    only_keys(r, "renewal", {"bracket", "tol"});
    read(r, "bracket", "renewal", cfg.renewal.bracket);
    read(r, "tol", "renewal", cfg.renewal.tol);
    positive(cfg.renewal.tol, "renewal.tol");
  }

  if (j.contains("mc")) {
    const json& m = j["mc"];
    only_keys(m, "mc", {"x0", "n_max", "n_paths", "level", "window"});
    read(m, "x0", "mc", cfg.mc.x0);
    read(m, "n_max", "mc", cfg.mc.n_max);
    read(m, "n_paths", "mc", cfg.mc.n_paths);
    read(m, "level", "mc", cfg.mc.level);
    read(m, "window", "mc", cfg.mc.window);
    if (cfg.mc.n_max < 1) throw Error(ErrorKind::InvalidConfig, "mc.n_max must be positive");
    if (cfg.mc.window.first < 0 || cfg.mc.window.second > cfg.mc.n_max || cfg.mc.window.second - cfg.mc.window.first < 4)
      throw Error(ErrorKind::InvalidConfig, "mc.window must hold at least five steps within [0, n_max]");
  }

  if (j.contains("fv")) {
    const json& f = j["fv"];
    only_keys(f, "fv", {"n_particles", "n_steps", "burn_in"});
    read(f, "n_particles", "fv", cfg.fv.n_particles);
    read(f, "n_steps", "fv", cfg.fv.n_steps);
    read(f, "burn_in", "fv", cfg.fv.burn_in);
  }

  if (j.contains("oracle")) {
    const json& o = j["oracle"];
    only_keys(o, "oracle", {"kind", "a", "tail_index"});
    read(o, "kind", "oracle", cfg.oracle.kind);
    read(o, "a", "oracle", cfg.oracle.a);
    read(o, "tail_index", "oracle", cfg.oracle.tail_index);
    const auto& k = cfg.oracle.kind;
    if (k != "laplace" && k != "gaussian" && k != "pareto" && k != "two_state")
      throw Error(ErrorKind::InvalidConfig, "oracle.kind must be laplace, gaussian, pareto or two_state");
  }

  if (j.contains("compare")) {
    const json& c = j["compare"];
    only_keys(c, "compare", {"renewal_abs", "slope_sigmas", "fv_rel"});
    read(c, "renewal_abs", "compare", cfg.compare.renewal_abs);
    read(c, "slope_sigmas", "compare", cfg.compare.slope_sigmas);
    read(c, "fv_rel", "compare", cfg.compare.fv_rel);
  }

  read(j, "seed", "config", cfg.seed);
  read(j, "threads", "config", cfg.threads);
  read(j, "out", "config", cfg.out);
  if (cfg.threads < 1) throw Error(ErrorKind::InvalidConfig, "threads must be at least 1");
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json grid{{"n_nodes", cfg.grid.n_nodes},
            {"scheme", to_string(cfg.grid.scheme)},
            {"policy", to_string(cfg.grid.policy)},
            {"overflow_tol", cfg.grid.overflow_tol},
            {"margin", cfg.grid.margin},
            {"lambda_pad", cfg.grid.lambda_pad}};
  if (cfg.grid.r) grid["r"] = *cfg.grid.r;
  if (cfg.grid.cap) grid["cap"] = *cfg.grid.cap;
  if (cfg.blocks_file) grid["blocks_file"] = *cfg.blocks_file;
  json renewal{{"tol", cfg.renewal.tol}};
  if (cfg.renewal.bracket) renewal["bracket"] = *cfg.renewal.bracket;
  json oracle{{"kind", cfg.oracle.kind}, {"tail_index", cfg.oracle.tail_index}};
  if (cfg.oracle.a) oracle["a"] = *cfg.oracle.a;
  json j{{"chain", {{"a", cfg.chain.a}, {"innovation", to_json(cfg.chain.innovation)}}},
         {"grid", grid},
         {"spectral",
          {{"tol", cfg.spectral.tol},
           {"max_iter", cfg.spectral.max_iter},
           {"convergence_trace", cfg.spectral.convergence_trace}}},
         {"renewal", renewal},
         {"mc",
          {{"x0", cfg.mc.x0},
           {"n_max", cfg.mc.n_max},
           {"n_paths", cfg.mc.n_paths},
           {"level", cfg.mc.level},
           {"window", cfg.mc.window}}},
         {"fv", {{"n_particles", cfg.fv.n_particles}, {"n_steps", cfg.fv.n_steps}, {"burn_in", cfg.fv.burn_in}}},
         {"oracle", oracle},
         {"compare",
          {{"renewal_abs", cfg.compare.renewal_abs},
           {"slope_sigmas", cfg.compare.slope_sigmas},
           {"fv_rel", cfg.compare.fv_rel}}},
         {"seed", cfg.seed},
         {"threads", cfg.threads},
         {"out", cfg.out}};
  if (cfg.two_state_fixture) j["fixture"] = "two_state";
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config syntax error: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace persist

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "persist/config.hpp"
#include "persist/errors.hpp"
#include "persist/io.hpp"
#include "persist/kernel.hpp"

using namespace persist;
namespace fs = std::filesystem;

namespace {
ErrorKind kind_of(const nlohmann::json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("config was accepted");
  return ErrorKind::InvalidConfig;
}
}  // namespace

TEST_CASE("defaults and overrides") {
  const RunConfig d = config_from_json(nlohmann::json::object());
  CHECK(d.chain.a == 0.5);
  CHECK(d.grid.n_nodes == 400);
  const RunConfig c = config_from_json(nlohmann::json::parse(R"({
    "chain": {"a": 0.7, "innovation": {"kind": "laplace", "scale": 2}},
    "grid": {"n_nodes": 800, "scheme": "gauss_legendre_composite", "policy": "reflect"},
    "mc": {"x0": 2, "n_max": 40, "window": [15, 40]},
    "seed": 42, "threads": 2
  })"));
  CHECK(c.chain.a == 0.7);
  CHECK(std::get<Laplace>(c.chain.innovation).scale == 2.0);
  CHECK(c.grid.scheme == QuadratureScheme::GaussLegendreComposite);
  CHECK(c.grid.policy == OverflowPolicy::ReflectTop);
  CHECK(c.mc.window == std::pair<long, long>{15, 40});
  CHECK(c.seed == 42);
  // round trip
  CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
}

TEST_CASE("schema violations") {
  CHECK(kind_of({{"chain", {{"a", 1.2}}}}) == ErrorKind::InvalidModel);
  CHECK(kind_of({{"bogus", 1}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"grid", {{"nodes", 10}}}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"grid", {{"scheme", "simpson"}}}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"chain", {{"a", "half"}}}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"mc", {{"window", {10, 12}}}}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"oracle", {{"kind", "weibull"}}}}) == ErrorKind::InvalidConfig);
  CHECK(kind_of({{"chain", {{"innovation", {{"kind", "gaussian"}, {"sigma", 1}}}}}}) == ErrorKind::InvalidConfig);
  CHECK(exit_code(ErrorKind::InvalidModel) == 2);
  CHECK(exit_code(ErrorKind::InvalidConfig) == 2);
  CHECK(exit_code(ErrorKind::BadBracket) == 3);
  CHECK(exit_code(ErrorKind::NoConvergence) == 4);
}

TEST_CASE("config files may carry comments") {
  const fs::path dir = fs::temp_directory_path() / "persist_config_test";
  fs::create_directories(dir);
  const fs::path file = dir / "run.json";
  std::ofstream(file) << "{\n  // chain\n  \"chain\": {\"a\": 0.3}\n}\n";
  CHECK(load_config(file.string()).chain.a == 0.3);
  std::ofstream(file) << "{ \"chain\": ";
  CHECK_THROWS_AS(load_config(file.string()), Error);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), Error);
}

TEST_CASE("blocks container round trip") {
  const ChainParams p{0.6, Gaussian{0.0, 1.5}};
  const KernelBlocks b = assemble_blocks(p, build_grid(p, 2.0, 40.0, 400, QuadratureScheme::GaussLegendreComposite),
                                         OverflowPolicy::ReflectTop);
  const fs::path file = fs::temp_directory_path() / "persist_blocks_test" / "k.bin";
  save_blocks(file, b);
  const KernelBlocks c = load_blocks(file);
  CHECK(c.Q == b.Q);
  CHECK(c.kill == b.kill);
  CHECK(c.overflow == b.overflow);
  CHECK(c.grid.nodes == b.grid.nodes);
  CHECK(c.grid.weights == b.grid.weights);
  CHECK(c.grid.cell_lo == b.grid.cell_lo);
  CHECK(c.grid.r_split == b.grid.r_split);
  CHECK(c.policy == b.policy);
  CHECK(c.grid.scheme == b.grid.scheme);
  CHECK(c.params.a == b.params.a);
  CHECK(to_json(c.params.innovation) == to_json(b.params.innovation));

  std::ofstream(file, std::ios::binary) << "not a kernel";
  CHECK_THROWS_AS(load_blocks(file), Error);
}

TEST_CASE("artifacts carry config and seed") {
  const fs::path dir = fs::temp_directory_path() / "persist_artifacts_test";
  const nlohmann::json cfg = to_json(config_from_json(nlohmann::json::object()));
  write_csv(dir / "x.csv", "a,b\n1,2\n", cfg, 77);
  write_json(dir / "x.json", {{"value", 1}}, cfg, 77);
  std::ifstream csv(dir / "x.csv");
  std::string l1, l2, l3;
  std::getline(csv, l1);
  std::getline(csv, l2);
  std::getline(csv, l3);
  CHECK(l1.rfind("# config: {", 0) == 0);
  CHECK(l2 == "# seed: 77");
  CHECK(l3 == "a,b");
  const auto j = nlohmann::json::parse(std::ifstream(dir / "x.json"));
  CHECK(j["seed"] == 77);
  CHECK(j["config"] == cfg);
  CHECK(j["value"] == 1);
}

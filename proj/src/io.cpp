#include "persist/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "persist/errors.hpp"

namespace persist {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'S', 'T', 'B', 'L', 'K', '1'};

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
  return v;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 8)) throw Error(ErrorKind::InvalidConfig, "truncated blocks file");
  return to_little(v);
}

void put_doubles(std::ostream& os, const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put_u64(os, std::bit_cast<std::uint64_t>(data[i]));
}

void get_doubles(std::istream& is, double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<double>(get_u64(is));
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, mode | std::ios::trunc);
  if (!os) throw Error(ErrorKind::InvalidConfig, "cannot write " + path.string());
  return os;
}

}  // namespace

void save_blocks(const std::filesystem::path& path, const KernelBlocks& blocks) {
  const Grid& g = blocks.grid;
  const nlohmann::json header{{"a", blocks.params.a},
                              {"innovation", to_json(blocks.params.innovation)},
                              {"policy", to_string(blocks.policy)},
                              {"scheme", to_string(g.scheme)},
                              {"r", g.r},
                              {"cap", g.cap},
                              {"r_split", g.r_split},
                              {"n", blocks.n()}};
  const std::string text = header.dump();
  std::ofstream os = open_out(path, std::ios::binary);
  os.write(kMagic, sizeof kMagic);
  put_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> q = blocks.Q;
  put_doubles(os, q.data(), static_cast<std::size_t>(q.size()));
  put_doubles(os, blocks.kill.data(), static_cast<std::size_t>(blocks.kill.size()));
  put_doubles(os, blocks.overflow.data(), static_cast<std::size_t>(blocks.overflow.size()));
  for (const auto* v : {&g.nodes, &g.weights, &g.cell_lo, &g.cell_hi}) put_doubles(os, v->data(), v->size());
  if (!os) throw Error(ErrorKind::InvalidConfig, "failed writing " + path.string());
}

KernelBlocks load_blocks(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::InvalidConfig, "cannot open blocks file " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw Error(ErrorKind::InvalidConfig, path.string() + " is not a blocks file");
  const std::uint64_t len = get_u64(is);
  if (len > (1u << 24)) throw Error(ErrorKind::InvalidConfig, "blocks header too long");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw Error(ErrorKind::InvalidConfig, "truncated blocks file");
  const auto header = nlohmann::json::parse(text);

  KernelBlocks b;
  b.params.a = header.at("a").get<double>();
  b.params.innovation = model_from_json(header.at("innovation"));
  b.policy = policy_from_string(header.at("policy").get<std::string>());
  Grid& g = b.grid;
  g.scheme = scheme_from_string(header.at("scheme").get<std::string>());
  g.r = header.at("r").get<double>();
  g.cap = header.at("cap").get<double>();
  g.r_split = header.at("r_split").get<std::size_t>();
  const auto n = header.at("n").get<Eigen::Index>();
  const auto un = static_cast<std::size_t>(n);

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> q(n, n);
  get_doubles(is, q.data(), un * un);
  b.Q = q;
  b.kill.resize(n);
  b.overflow.resize(n);
  get_doubles(is, b.kill.data(), un);
  get_doubles(is, b.overflow.data(), un);
  for (auto* v : {&g.nodes, &g.weights, &g.cell_lo, &g.cell_hi}) {
    v->resize(un);
    get_doubles(is, v->data(), un);
  }
  return b;
}

void write_csv(const std::filesystem::path& path, const std::string& csv, const nlohmann::json& config,
               std::uint64_t seed) {
  std::ofstream os = open_out(path);
  os << "# config: " << config.dump() << '\n' << "# seed: " << seed << '\n' << csv;
}

void write_json(const std::filesystem::path& path, nlohmann::json body, const nlohmann::json& config,
                std::uint64_t seed) {
  body["config"] = config;
  body["seed"] = seed;
  std::ofstream os = open_out(path);
  os << body.dump(2) << '\n';
}

}  // namespace persist

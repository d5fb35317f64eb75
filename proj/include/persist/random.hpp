#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace persist {

// Deterministic seed derivation: mixes a master seed with a list of indices
// (block number, step number, ...) through splitmix64.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

// A reproducible stream of uniforms in the open interval (0,1). Every draw is
// counted so callers can verify how many uniforms a sampler consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream substream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return RandomStream(derive_seed(master, path));
  }

  double uniform() {
    ++draws_;
    // 53 random bits, shifted half an ulp away from 0.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Index in [0, n).
  std::uint64_t below(std::uint64_t n) {
    ++draws_;
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  [[nodiscard]] std::uint64_t draws() const noexcept { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace persist

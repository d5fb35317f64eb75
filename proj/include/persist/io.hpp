#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "persist/kernel.hpp"

namespace persist {

// Binary container for assembled kernels:
//   "PRSTBLK1" | u64 header length | JSON header | little-endian doubles
// The header records the model, grid layout and overflow policy; the payload is
// Q (row-major), kill, overflow, nodes, weights, cell_lo, cell_hi.
void save_blocks(const std::filesystem::path& path, const KernelBlocks& blocks);
KernelBlocks load_blocks(const std::filesystem::path& path);

// Artifact writers. CSV files get '#'-prefixed lines carrying the config and
// seed; JSON files get them under "config" and "seed".
void write_csv(const std::filesystem::path& path, const std::string& csv, const nlohmann::json& config,
               std::uint64_t seed);
void write_json(const std::filesystem::path& path, nlohmann::json body, const nlohmann::json& config,
                std::uint64_t seed);

}  // namespace persist

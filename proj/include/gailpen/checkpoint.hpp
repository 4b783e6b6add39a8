#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gailpen/network.hpp"

namespace gailpen {

struct CheckpointMeta {
  std::string kind;     // "actor", "critic", "critic_target", "discriminator", "predictor"
  std::uint64_t seed = 0;
  int step = 0;
  std::string version;  // filled by save_checkpoint
};

struct Checkpoint {
  ParameterSet params;
  CheckpointMeta meta;
};

// Binary parameter file: fixed magic, format version, a JSON manifest
// (network shape, kind, seed, creation step, library version) and the named
// flat arrays as little-endian doubles. Loading what was saved reproduces
// every parameter bitwise. The file is written to a temporary name and
// renamed into place, so a crash never leaves a truncated checkpoint behind.
void save_checkpoint(const std::filesystem::path& destination,
                     const ParameterSet& params, const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& source);

}  // namespace gailpen

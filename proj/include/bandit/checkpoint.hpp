#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bandit/model.hpp"
#include "bandit/optimizer.hpp"
#include "bandit/vocabulary.hpp"

namespace bandit {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMetadata {
  std::uint64_t iteration = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  friend bool operator==(const CheckpointMetadata&, const CheckpointMetadata&) = default;
};

struct Checkpoint {
  Vocabulary vocab;
  ModelParams params;
  std::optional<OptimizerState> optimizer;
  CheckpointMetadata metadata;
};

// Layout (all integers little-endian):
//   "BNSQ" | u32 version
//   u32 token count | per token: u32 byte length, UTF-8 bytes      (id order)
//   tensor block: u32 count | per tensor: u32 name length, name, u32 rank,
//                 u64 dims[rank], f64 values (row-major)
//   u8 optimizer flag | if 1: u64 step, f64 alpha, beta1, beta2, eps,
//                      first-moment tensor block, second-moment tensor block
//   u64 iteration | u64 seed | u64 config hash
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws FormatError naming the byte offset of the first problem.
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bandit

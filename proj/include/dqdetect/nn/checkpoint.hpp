#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "dqdetect/nn/model.hpp"

namespace dqd::nn {

// Checkpoint layout, all integers little-endian:
//   "DQCK"  u32 version(=1)  u32 headerBytes  header JSON (UTF-8)
//   u32 parameterCount
//   per parameter: u32 nameBytes, name, u32 rank(=4), 4 x u32 dims,
//                  u8 trainable, dims-product float32 values
// The header JSON is {"model": ModelConfig, "metadata": <caller data>}.
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void saveCheckpoint(std::ostream& out, Model<float>& model, const nlohmann::json& metadata = {});
void saveCheckpoint(const std::filesystem::path& path, Model<float>& model, const nlohmann::json& metadata = {});

struct LoadedCheckpoint {
  Model<float> model;
  nlohmann::json metadata;
};

LoadedCheckpoint loadCheckpoint(std::istream& in);
LoadedCheckpoint loadCheckpoint(const std::filesystem::path& path);

}  // namespace dqd::nn

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqdetect/qmatrix.hpp"
#include "dqdetect/synthesis.hpp"

namespace dqd {

inline constexpr const char* kVersion = "0.1.0";

// Pool from a JSON file path or a preset name:
//   default[:seed]      standard QF 51..100 plus 50 perturbations
//   desk:N[:seed]       deskPool(seed, N)
//   uniform:S1,S2,...   uniform matrices with the listed steps
// Presets without an explicit seed use `seed`.
QMatrixPool resolvePool(const std::string& spec, std::uint64_t seed);

// "<seed>:<trainCount>"
struct PoolSplitSpec {
  std::uint64_t seed = 0;
  std::size_t trainCount = 0;
};
PoolSplitSpec parsePoolSplit(const std::string& text);

// Patch set on disk: one JPEG per patch plus patches.json
//   {"patches": [{"file", "label": "single"|"double", "source", "q_ids"}]}
void writePatchSet(const std::filesystem::path& dir, const std::vector<LabeledPatch>& patches);
std::vector<LabeledPatch> readPatchSet(const std::filesystem::path& dirOrIndex);

// Case bundle: forged.jpg, mask.pgm (0 / 255 per 8x8 block), provenance.json.
void writeCaseBundle(const std::filesystem::path& dir, const ForgeryCase& forgery);

struct CaseBundle {
  JpegStream forged;
  int blocksX = 0;
  int blocksY = 0;
  std::vector<std::uint8_t> mask;
  nlohmann::json provenance;
};
CaseBundle readCaseBundle(const std::filesystem::path& dir);

// Reads a block mask PGM written by writeCaseBundle (any nonzero = tampered).
std::vector<std::uint8_t> readBlockMask(const std::filesystem::path& path, int& blocksX, int& blocksY);

// Stable pretty-printed JSON with a trailing newline.
void writeJson(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace dqd

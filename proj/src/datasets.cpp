#include "dqdetect/datasets.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dqdetect/image_io.hpp"

namespace dqd {
namespace {

std::vector<std::string> splitOn(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

std::uint64_t toU64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("invalid " + what + ": '" + s + "'");
  }
  return v;
}

}  // namespace

QMatrixPool resolvePool(const std::string& spec, std::uint64_t seed) {
  const auto parts = splitOn(spec, ':');
  if (!parts.empty() && parts[0] == "default" && parts.size() <= 2) {
    return defaultPool(parts.size() == 2 ? toU64(parts[1], "pool seed") : seed);
  }
  if (!parts.empty() && parts[0] == "desk" && (parts.size() == 2 || parts.size() == 3)) {
    return deskPool(parts.size() == 3 ? toU64(parts[2], "pool seed") : seed, toU64(parts[1], "pool size"));
  }
  if (!parts.empty() && parts[0] == "uniform" && parts.size() == 2) {
    std::vector<int> steps;
    for (const auto& s : splitOn(parts[1], ',')) steps.push_back(static_cast<int>(toU64(s, "uniform step")));
    return uniformPool(steps);
  }
  if (!std::filesystem::exists(spec)) throw std::invalid_argument("Q-matrix pool not found: " + spec);
  return loadPool(spec);
}

PoolSplitSpec parsePoolSplit(const std::string& text) {
  const auto parts = splitOn(text, ':');
  if (parts.size() != 2) throw std::invalid_argument("pool split must look like <seed>:<trainCount>");
  return {toU64(parts[0], "split seed"), static_cast<std::size_t>(toU64(parts[1], "train count"))};
}

void writeJson(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void writePatchSet(const std::filesystem::path& dir, const std::vector<LabeledPatch>& patches) {
  std::filesystem::create_directories(dir);
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const LabeledPatch& p = patches[i];
    char name[64];
    std::snprintf(name, sizeof name, "patch_%06zu_%s.jpg", i, p.label == CompressionLabel::Double ? "d" : "s");
    writeJpeg(dir / name, p.stream);
    index.push_back({{"file", name},
                     {"label", p.label == CompressionLabel::Double ? "double" : "single"},
                     {"source", p.sourceId},
                     {"q_ids", p.qIds}});
  }
  writeJson(dir / "patches.json", {{"patches", index}});
}

std::vector<LabeledPatch> readPatchSet(const std::filesystem::path& dirOrIndex) {
  const std::filesystem::path index =
      std::filesystem::is_directory(dirOrIndex) ? dirOrIndex / "patches.json" : dirOrIndex;
  std::ifstream in(index);
  if (!in) throw std::invalid_argument("patch index not found: " + index.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(index.string() + ": " + e.what());
  }
  std::vector<LabeledPatch> out;
  for (const auto& e : j.at("patches")) {
    LabeledPatch p;
    p.stream = readJpeg(index.parent_path() / e.at("file").get<std::string>());
    const std::string label = e.at("label").get<std::string>();
    if (label != "single" && label != "double") throw std::invalid_argument("unknown label '" + label + "'");
    p.label = label == "double" ? CompressionLabel::Double : CompressionLabel::Single;
    p.sourceId = e.value("source", "");
    p.qIds = e.value("q_ids", std::vector<std::string>{});
    out.push_back(std::move(p));
  }
  return out;
}

void writeCaseBundle(const std::filesystem::path& dir, const ForgeryCase& forgery) {
  std::filesystem::create_directories(dir);
  writeJpeg(dir / "forged.jpg", forgery.forged);
  std::vector<std::uint8_t> px(forgery.mask.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = forgery.mask[i] ? 255 : 0;
  writePgm(dir / "mask.pgm", forgery.maskBlocksX, forgery.maskBlocksY, px);
  writeJson(dir / "provenance.json", forgery.provenance());
}

std::vector<std::uint8_t> readBlockMask(const std::filesystem::path& path, int& blocksX, int& blocksY) {
  const GrayImage img = readPgm(path);
  blocksX = img.width;
  blocksY = img.height;
  std::vector<std::uint8_t> mask(img.samples.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = img.samples[i] ? 1 : 0;
  return mask;
}

CaseBundle readCaseBundle(const std::filesystem::path& dir) {
  CaseBundle b;
  b.forged = readJpeg(dir / "forged.jpg");
  b.mask = readBlockMask(dir / "mask.pgm", b.blocksX, b.blocksY);
  std::ifstream in(dir / "provenance.json");
  if (in) b.provenance = nlohmann::json::parse(in);
  return b;
}

}  // namespace dqd

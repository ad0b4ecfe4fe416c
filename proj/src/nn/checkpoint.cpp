#include "dqdetect/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace dqd::nn {
namespace {

void putU32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

std::uint32_t getU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw CheckpointError("truncated checkpoint");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string getString(std::istream& in, std::uint32_t limit) {
  const std::uint32_t n = getU32(in);
  if (n > limit) throw CheckpointError("implausible string length in checkpoint");
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw CheckpointError("truncated checkpoint");
  return s;
}

}  // namespace

void saveCheckpoint(std::ostream& out, Model<float>& model, const nlohmann::json& metadata) {
  out.write("DQCK", 4);
  putU32(out, kCheckpointVersion);
  const std::string header = nlohmann::json{{"model", model.config().toJson()}, {"metadata", metadata}}.dump();
  putU32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto params = model.parameters();
  putU32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    putU32(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    putU32(out, 4);
    for (int d : p->value.shape) putU32(out, static_cast<std::uint32_t>(d));
    out.put(p->trainable ? 1 : 0);
    for (float v : p->value.data) putU32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw CheckpointError("failed writing checkpoint");
}

void saveCheckpoint(const std::filesystem::path& path, Model<float>& model, const nlohmann::json& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  saveCheckpoint(out, model, metadata);
}

LoadedCheckpoint loadCheckpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "DQCK", 4) != 0) throw CheckpointError("not a checkpoint file");
  const std::uint32_t version = getU32(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(getString(in, 1U << 20));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  ModelConfig config;
  try {
    config = ModelConfig::fromJson(header.at("model"));
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("bad model config: ") + e.what());
  }
  LoadedCheckpoint loaded{Model<float>(config, 0), header.value("metadata", nlohmann::json{})};

  std::map<std::string, Parameter<float>*> byName;
  for (auto* p : loaded.model.parameters()) byName[p->name] = p;

  const std::uint32_t count = getU32(in);
  if (count != byName.size()) throw CheckpointError("parameter count does not match model");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = getString(in, 4096);
    auto it = byName.find(name);
    if (it == byName.end()) throw CheckpointError("unknown parameter '" + name + "'");
    auto* p = it->second;
    if (getU32(in) != 4) throw CheckpointError("parameter '" + name + "' has unexpected rank");
    for (int d = 0; d < 4; ++d) {
      if (getU32(in) != static_cast<std::uint32_t>(p->value.shape[static_cast<std::size_t>(d)])) {
        throw CheckpointError("shape mismatch for parameter '" + name + "'");
      }
    }
    if (in.get() == std::char_traits<char>::eof()) throw CheckpointError("truncated checkpoint");
    for (auto& v : p->value.data) v = std::bit_cast<float>(getU32(in));
    byName.erase(it);
  }
  return loaded;
}

LoadedCheckpoint loadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return loadCheckpoint(in);
}

}  // namespace dqd::nn

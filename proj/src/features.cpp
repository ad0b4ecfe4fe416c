#include "dqdetect/features.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dqd {

HistogramSet buildHistograms(const QuantizedBlockGrid& grid, int b) {
  if (b < 1) throw std::invalid_argument("histogram half-range b must be >= 1");
  HistogramSet h;
  h.b = b;
  const auto cols = static_cast<std::size_t>(h.cols());
  h.counts.assign(kFrequencyRows * cols, 0);
  for (const auto& block : grid.blocks) {
    for (std::size_t r = 0; r < kFrequencyRows; ++r) {
      const int bin = std::clamp(block[r], -b, b) + b;
      ++h.counts[r * cols + static_cast<std::size_t>(bin)];
    }
  }
  return h;
}

std::vector<std::int32_t> buildQPrime(const QMatrix& q, int b) {
  if (b < 1) throw std::invalid_argument("histogram half-range b must be >= 1");
  const auto cols = static_cast<std::size_t>(2 * b + 1);
  std::vector<std::int32_t> out(kFrequencyRows * cols);
  for (std::size_t r = 0; r < kFrequencyRows; ++r) {
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(r * cols), cols, q[static_cast<int>(r)]);
  }
  return out;
}

FeatureTensor buildFeature(const QuantizedBlockGrid& grid, const FeatureOptions& options) {
  const HistogramSet h = buildHistograms(grid, options.b);
  FeatureTensor f;
  f.cols = h.cols();
  f.channels = options.withQFactors ? 2 : 1;
  f.values.resize(static_cast<std::size_t>(f.rows * f.cols * f.channels));
  const auto ch = static_cast<std::size_t>(f.channels);
  if (options.withQFactors) {
    const auto qprime = buildQPrime(grid.qmatrix, options.b);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      f.values[i * ch] = h.counts[i];
      f.values[i * ch + 1] = qprime[i];
    }
  } else {
    std::copy(h.counts.begin(), h.counts.end(), f.values.begin());
  }
  return f;
}

void toNetworkInput(const FeatureTensor& feature, const FeatureOptions& options,
                    std::int64_t blockCount, float* out) {
  const std::size_t plane = static_cast<std::size_t>(feature.rows) * static_cast<std::size_t>(feature.cols);
  const auto ch = static_cast<std::size_t>(feature.channels);
  const float countScale =
      options.normalizeRows && blockCount > 0 ? 1.0f / static_cast<float>(blockCount) : 1.0f;
  for (std::size_t i = 0; i < plane; ++i) {
    out[i] = static_cast<float>(feature.values[i * ch]) * countScale;
    for (std::size_t c = 1; c < ch; ++c) {
      out[c * plane + i] = static_cast<float>(feature.values[i * ch + c] * options.qScale);
    }
  }
}

nlohmann::json FeatureOptions::toJson() const {
  return {{"b", b}, {"with_q_factors", withQFactors}, {"normalize_rows", normalizeRows}, {"q_scale", qScale}};
}

FeatureOptions FeatureOptions::fromJson(const nlohmann::json& j) {
  FeatureOptions o;
  o.b = j.at("b").get<int>();
  o.withQFactors = j.at("with_q_factors").get<bool>();
  o.normalizeRows = j.value("normalize_rows", o.normalizeRows);
  o.qScale = j.value("q_scale", o.qScale);
  if (o.b < 1) throw std::invalid_argument("histogram half-width b must be at least 1");
  return o;
}

namespace {

void putLe32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

bool getLe32(std::istream& in, std::uint32_t& v) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
      (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
  return true;
}

}  // namespace

void writeFeature(std::ostream& out, const FeatureTensor& feature) {
  putLe32(out, kFeatureMagic);
  putLe32(out, static_cast<std::uint32_t>(feature.rows));
  putLe32(out, static_cast<std::uint32_t>(feature.cols));
  putLe32(out, static_cast<std::uint32_t>(feature.channels));
  for (auto v : feature.values) putLe32(out, static_cast<std::uint32_t>(v));
}

std::vector<FeatureTensor> readFeatures(std::istream& in) {
  std::vector<FeatureTensor> out;
  std::uint32_t magic;
  while (getLe32(in, magic)) {
    if (magic != kFeatureMagic) throw std::runtime_error("bad feature record magic");
    std::uint32_t rows, cols, channels;
    if (!getLe32(in, rows) || !getLe32(in, cols) || !getLe32(in, channels)) {
      throw std::runtime_error("truncated feature header");
    }
    if (rows != kFrequencyRows || cols == 0 || cols > 100001 || (channels != 1 && channels != 2)) {
      throw std::runtime_error("implausible feature shape");
    }
    FeatureTensor f;
    f.rows = static_cast<int>(rows);
    f.cols = static_cast<int>(cols);
    f.channels = static_cast<int>(channels);
    f.values.resize(static_cast<std::size_t>(rows) * cols * channels);
    for (auto& v : f.values) {
      std::uint32_t raw;
      if (!getLe32(in, raw)) throw std::runtime_error("truncated feature values");
      v = static_cast<std::int32_t>(raw);
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace dqd

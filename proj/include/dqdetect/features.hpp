#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqdetect/jpeg/types.hpp"

namespace dqd {

inline constexpr int kFrequencyRows = 64;

// Per-frequency histograms of quantized coefficients over integer bins [-b, b].
// Row r is frequency (u, v) with r = u * 8 + v; column c is bin value c - b.
struct HistogramSet {
  int b = 0;
  std::vector<std::int32_t> counts;  // 64 x (2b + 1), row-major

  int cols() const { return 2 * b + 1; }
  std::int32_t at(int row, int bin) const {
    return counts[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols()) +
                  static_cast<std::size_t>(bin + b)];
  }
};

// Classifier input, 64 x (2b+1) x channels, flattened with the channel index
// fastest. Channel 0 holds histogram counts, channel 1 (when present) the
// q-factor of the row's frequency repeated across the row.
struct FeatureTensor {
  int rows = kFrequencyRows;
  int cols = 0;
  int channels = 0;
  std::vector<std::int32_t> values;

  std::int32_t at(int row, int col, int channel) const {
    return values[(static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
                   static_cast<std::size_t>(col)) *
                      static_cast<std::size_t>(channels) +
                  static_cast<std::size_t>(channel)];
  }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;
};

struct FeatureOptions {
  int b = 100;
  bool withQFactors = true;
  // Network input scaling; the FeatureTensor itself always holds raw values.
  // With normalizeRows counts are divided by the block count so each row sums
  // to 1. q-factors are multiplied by qScale.
  bool normalizeRows = false;
  double qScale = 1.0;

  // Counts per block and q-factors divided by 255, both channels in [0, 1].
  static FeatureOptions unitScaled(int b = 100, bool withQFactors = true) {
    return {b, withQFactors, true, 1.0 / 255.0};
  }

  nlohmann::json toJson() const;
  static FeatureOptions fromJson(const nlohmann::json& j);
};

// Values beyond +-b saturate into the edge bins, so every row sums to the block count.
HistogramSet buildHistograms(const QuantizedBlockGrid& grid, int b);

// 64 x (2b+1) matrix whose row r repeats Q at the r-th frequency.
std::vector<std::int32_t> buildQPrime(const QMatrix& q, int b);

FeatureTensor buildFeature(const QuantizedBlockGrid& grid, const FeatureOptions& options);

// Channel-major float copy (channels x 64 x (2b+1)) for the network.
void toNetworkInput(const FeatureTensor& feature, const FeatureOptions& options,
                    std::int64_t blockCount, float* out);

// Feature dump: per record a header of four little-endian int32
// {magic, rows, cols, channels} followed by rows*cols*channels little-endian
// int32 values in FeatureTensor order. Files hold one or more records.
inline constexpr std::uint32_t kFeatureMagic = 0x54464844;  // "DHFT"

void writeFeature(std::ostream& out, const FeatureTensor& feature);
std::vector<FeatureTensor> readFeatures(std::istream& in);

}  // namespace dqd

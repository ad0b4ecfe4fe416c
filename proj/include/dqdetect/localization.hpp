#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqdetect/jpeg/types.hpp"
#include "dqdetect/metrics.hpp"
#include "dqdetect/synthesis.hpp"
#include "dqdetect/training.hpp"

namespace dqd {

inline constexpr double kTamperThreshold = 0.5;

struct TamperMap {
  int width = 0;
  int height = 0;
  int window = 0;
  int stride = 0;
  std::vector<int> xs;  // window left edges
  std::vector<int> ys;  // window top edges
  std::vector<double> perWindow;  // P(double), row-major over (ys, xs)
  std::vector<double> perPixel;   // mean P(double) over covering windows

  double windowProbability(int ix, int iy) const {
    return perWindow[static_cast<std::size_t>(iy) * xs.size() + static_cast<std::size_t>(ix)];
  }
  // 1 where the window is flagged as tampered (P(double) below threshold).
  std::vector<std::uint8_t> windowDecisions(double threshold = kTamperThreshold) const;
  std::vector<std::uint8_t> pixelDecisions(double threshold = kTamperThreshold) const;

  nlohmann::json toJson() const;
};

// Throws std::invalid_argument when the image is smaller than the window or
// window/stride are not multiples of 8.
TamperMap localize(const JpegStream& image, PatchClassifier& classifier, int stride = 32, int window = 256);
TamperMap localize(const QuantizedBlockGrid& grid, PatchClassifier& classifier, int stride = 32, int window = 256);

// Window-level scores; positive = tampered.
Confusion scoreLocalization(const TamperMap& map, const WindowLabels& truth, double threshold = kTamperThreshold);

// Pixel-level scores against an 8x8-block mask.
Confusion scorePixels(const TamperMap& map, const std::vector<std::uint8_t>& blockMask, int blocksX, int blocksY,
                      double threshold = kTamperThreshold);

// Per-pixel field scaled to 0..255.
void writeHeatmap(const std::filesystem::path& path, const TamperMap& map);

}  // namespace dqd

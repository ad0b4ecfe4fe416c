#include "dqdetect/localization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dqdetect/image_io.hpp"
#include "dqdetect/jpeg/codec.hpp"
#include "dqdetect/windows.hpp"

namespace dqd {

std::vector<std::uint8_t> TamperMap::windowDecisions(double threshold) const {
  std::vector<std::uint8_t> out(perWindow.size());
  for (std::size_t i = 0; i < perWindow.size(); ++i) out[i] = perWindow[i] < threshold ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> TamperMap::pixelDecisions(double threshold) const {
  std::vector<std::uint8_t> out(perPixel.size());
  for (std::size_t i = 0; i < perPixel.size(); ++i) out[i] = perPixel[i] < threshold ? 1 : 0;
  return out;
}

nlohmann::json TamperMap::toJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t iy = 0; iy < ys.size(); ++iy) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t ix = 0; ix < xs.size(); ++ix) row.push_back(perWindow[iy * xs.size() + ix]);
    rows.push_back(std::move(row));
  }
  return {{"width", width}, {"height", height}, {"window", window}, {"stride", stride},
          {"xs", xs},       {"ys", ys},         {"p_double", rows}};
}

TamperMap localize(const JpegStream& image, PatchClassifier& classifier, int stride, int window) {
  return localize(decodeCoefficients(image), classifier, stride, window);
}

TamperMap localize(const QuantizedBlockGrid& grid, PatchClassifier& classifier, int stride, int window) {
  if (window % kBlockDim != 0 || stride % kBlockDim != 0) {
    throw std::invalid_argument("window and stride must be multiples of 8");
  }
  TamperMap map;
  map.width = grid.blocksX * kBlockDim;
  map.height = grid.blocksY * kBlockDim;
  map.window = window;
  map.stride = stride;
  map.xs = windowOffsets(map.width, window, stride);
  map.ys = windowOffsets(map.height, window, stride);

  const int wb = window / kBlockDim;
  std::vector<QuantizedBlockGrid> crops;
  crops.reserve(map.xs.size() * map.ys.size());
  for (int y : map.ys) {
    for (int x : map.xs) crops.push_back(grid.crop(x / kBlockDim, y / kBlockDim, wb, wb));
  }
  map.perWindow = classifier.probabilityDouble(crops);
  if (map.perWindow.size() != crops.size()) throw std::runtime_error("classifier returned wrong number of scores");
  for (double p : map.perWindow) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::runtime_error("classifier probability outside [0,1]");
  }

  // Sum and coverage through 2D difference arrays.
  const std::size_t w1 = static_cast<std::size_t>(map.width) + 1;
  std::vector<double> sum(w1 * (static_cast<std::size_t>(map.height) + 1), 0.0);
  std::vector<int> cover(sum.size(), 0);
  for (std::size_t iy = 0; iy < map.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < map.xs.size(); ++ix) {
      const double p = map.perWindow[iy * map.xs.size() + ix];
      const std::size_t x0 = static_cast<std::size_t>(map.xs[ix]), y0 = static_cast<std::size_t>(map.ys[iy]);
      const std::size_t x1 = x0 + static_cast<std::size_t>(window), y1 = y0 + static_cast<std::size_t>(window);
      sum[y0 * w1 + x0] += p;
      sum[y0 * w1 + x1] -= p;
      sum[y1 * w1 + x0] -= p;
      sum[y1 * w1 + x1] += p;
      cover[y0 * w1 + x0] += 1;
      cover[y0 * w1 + x1] -= 1;
      cover[y1 * w1 + x0] -= 1;
      cover[y1 * w1 + x1] += 1;
    }
  }
  for (std::size_t y = 0; y <= static_cast<std::size_t>(map.height); ++y) {
    for (std::size_t x = 0; x <= static_cast<std::size_t>(map.width); ++x) {
      if (x > 0) {
        sum[y * w1 + x] += sum[y * w1 + x - 1];
        cover[y * w1 + x] += cover[y * w1 + x - 1];
      }
      if (y > 0) {
        sum[y * w1 + x] += sum[(y - 1) * w1 + x];
        cover[y * w1 + x] += cover[(y - 1) * w1 + x];
      }
      if (x > 0 && y > 0) {
        sum[y * w1 + x] -= sum[(y - 1) * w1 + x - 1];
        cover[y * w1 + x] -= cover[(y - 1) * w1 + x - 1];
      }
    }
  }
  map.perPixel.resize(static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height));
  for (std::size_t y = 0; y < static_cast<std::size_t>(map.height); ++y) {
    for (std::size_t x = 0; x < static_cast<std::size_t>(map.width); ++x) {
      const double v = sum[y * w1 + x] / cover[y * w1 + x];
      map.perPixel[y * static_cast<std::size_t>(map.width) + x] = std::clamp(v, 0.0, 1.0);
    }
  }
  return map;
}

Confusion scoreLocalization(const TamperMap& map, const WindowLabels& truth, double threshold) {
  if (truth.xs != map.xs || truth.ys != map.ys) throw std::invalid_argument("ground truth window grid differs from map");
  const std::vector<std::uint8_t> decisions = map.windowDecisions(threshold);
  const std::vector<int> labels(truth.tampered.begin(), truth.tampered.end());
  const std::vector<int> preds(decisions.begin(), decisions.end());
  return confusion(labels, preds);
}

Confusion scorePixels(const TamperMap& map, const std::vector<std::uint8_t>& blockMask, int blocksX, int blocksY,
                      double threshold) {
  if (blocksX * kBlockDim != map.width || blocksY * kBlockDim != map.height ||
      blockMask.size() != static_cast<std::size_t>(blocksX) * static_cast<std::size_t>(blocksY)) {
    throw std::invalid_argument("mask dimensions differ from map");
  }
  Confusion c;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const bool truth = blockMask[static_cast<std::size_t>(y / kBlockDim) * blocksX + x / kBlockDim] != 0;
      const bool flagged = map.perPixel[static_cast<std::size_t>(y) * map.width + x] < threshold;
      if (truth && flagged) ++c.tp;
      else if (truth) ++c.fn;
      else if (flagged) ++c.fp;
      else ++c.tn;
    }
  }
  return c;
}

void writeHeatmap(const std::filesystem::path& path, const TamperMap& map) {
  std::vector<std::uint8_t> px(map.perPixel.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(map.perPixel[i], 0.0, 1.0) * 255.0));
  }
  writePgm(path, map.width, map.height, px);
}

}  // namespace dqd

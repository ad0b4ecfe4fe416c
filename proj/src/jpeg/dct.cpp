#include "dqdetect/jpeg/dct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dqd {
namespace {

// basis[u][x] = alpha(u) * cos((2x + 1) u pi / 16)
struct DctBasis {
  double m[kBlockDim][kBlockDim];

  DctBasis() {
    for (int u = 0; u < kBlockDim; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / kBlockDim) : std::sqrt(2.0 / kBlockDim);
      for (int x = 0; x < kBlockDim; ++x) {
        m[u][x] = alpha * std::cos((2.0 * x + 1.0) * u * std::numbers::pi / (2.0 * kBlockDim));
      }
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

}  // namespace

RealBlock forwardBlockTransform(const RealBlock& block) {
  const auto& c = basis().m;
  RealBlock tmp{};
  // Rows: tmp[y][v] = sum_x c[v][x] f[y][x]
  for (int y = 0; y < kBlockDim; ++y) {
    for (int v = 0; v < kBlockDim; ++v) {
      double s = 0.0;
      for (int x = 0; x < kBlockDim; ++x) s += c[v][x] * block[y * kBlockDim + x];
      tmp[y * kBlockDim + v] = s;
    }
  }
  RealBlock out{};
  for (int u = 0; u < kBlockDim; ++u) {
    for (int v = 0; v < kBlockDim; ++v) {
      double s = 0.0;
      for (int y = 0; y < kBlockDim; ++y) s += c[u][y] * tmp[y * kBlockDim + v];
      out[u * kBlockDim + v] = s;
    }
  }
  return out;
}

RealBlock inverseBlockTransform(const RealBlock& coeffs) {
  const auto& c = basis().m;
  RealBlock tmp{};
  // Columns first: tmp[y][v] = sum_u c[u][y] F[u][v]
  for (int y = 0; y < kBlockDim; ++y) {
    for (int v = 0; v < kBlockDim; ++v) {
      double s = 0.0;
      for (int u = 0; u < kBlockDim; ++u) s += c[u][y] * coeffs[u * kBlockDim + v];
      tmp[y * kBlockDim + v] = s;
    }
  }
  RealBlock out{};
  for (int y = 0; y < kBlockDim; ++y) {
    for (int x = 0; x < kBlockDim; ++x) {
      double s = 0.0;
      for (int v = 0; v < kBlockDim; ++v) s += c[v][x] * tmp[y * kBlockDim + v];
      out[y * kBlockDim + x] = s;
    }
  }
  return out;
}

CoefficientBlock quantize(const RealBlock& coeffs, const QMatrix& q) {
  CoefficientBlock out{};
  for (int i = 0; i < kBlockArea; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(std::round(coeffs[i] / q[i]));
  }
  return out;
}

QuantizedBlockGrid quantizePatch(const PixelPatch& patch, const QMatrix& q) {
  QuantizedBlockGrid grid;
  grid.blocksX = patch.width / kBlockDim;
  grid.blocksY = patch.height / kBlockDim;
  grid.qmatrix = q;
  grid.blocks.resize(static_cast<std::size_t>(grid.blocksX) * static_cast<std::size_t>(grid.blocksY));
  RealBlock block{};
  for (int by = 0; by < grid.blocksY; ++by) {
    for (int bx = 0; bx < grid.blocksX; ++bx) {
      for (int y = 0; y < kBlockDim; ++y) {
        for (int x = 0; x < kBlockDim; ++x) {
          block[y * kBlockDim + x] = patch.at(bx * kBlockDim + x, by * kBlockDim + y) - 128.0;
        }
      }
      grid.block(bx, by) = quantize(forwardBlockTransform(block), q);
    }
  }
  return grid;
}

PixelPatch reconstructPixels(const QuantizedBlockGrid& grid) {
  PixelPatch out(grid.blocksX * kBlockDim, grid.blocksY * kBlockDim);
  RealBlock coeffs{};
  for (int by = 0; by < grid.blocksY; ++by) {
    for (int bx = 0; bx < grid.blocksX; ++bx) {
      const auto& b = grid.block(bx, by);
      for (int i = 0; i < kBlockArea; ++i) {
        coeffs[i] = static_cast<double>(b[static_cast<std::size_t>(i)]) * grid.qmatrix[i];
      }
      const RealBlock pixels = inverseBlockTransform(coeffs);
      for (int y = 0; y < kBlockDim; ++y) {
        for (int x = 0; x < kBlockDim; ++x) {
          const double v = std::round(pixels[y * kBlockDim + x] + 128.0);
          out.at(bx * kBlockDim + x, by * kBlockDim + y) =
              static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
      }
    }
  }
  return out;
}

}  // namespace dqd

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqd {

inline constexpr int kBlockDim = 8;
inline constexpr int kBlockArea = 64;

// 8x8 table of quantization steps, stored row-major by frequency (u, v):
// index u * 8 + v, u the vertical and v the horizontal frequency.
class QMatrix {
 public:
  QMatrix();
  explicit QMatrix(std::span<const int> steps);

  static QMatrix uniform(int step);

  int operator[](int index) const { return steps_[static_cast<std::size_t>(index)]; }
  int at(int u, int v) const { return steps_[static_cast<std::size_t>(u * kBlockDim + v)]; }
  const std::array<std::uint16_t, kBlockArea>& steps() const { return steps_; }
  std::vector<int> toVector() const { return {steps_.begin(), steps_.end()}; }

  friend bool operator==(const QMatrix&, const QMatrix&) = default;

 private:
  std::array<std::uint16_t, kBlockArea> steps_;
};

// 8-bit luma samples, row-major. Both dimensions are multiples of 8.
struct PixelPatch {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  PixelPatch() = default;
  PixelPatch(int w, int h, std::uint8_t fill = 0);
  PixelPatch(int w, int h, std::vector<std::uint8_t> data);

  std::uint8_t at(int x, int y) const {
    return samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(x)];
  }
  std::uint8_t& at(int x, int y) {
    return samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(x)];
  }

  PixelPatch crop(int x0, int y0, int w, int h) const;

  friend bool operator==(const PixelPatch&, const PixelPatch&) = default;
};

// Quantized DCT coefficients of one 8x8 block in natural (u, v) order.
using CoefficientBlock = std::array<std::int32_t, kBlockArea>;

struct QuantizedBlockGrid {
  int blocksX = 0;
  int blocksY = 0;
  std::vector<CoefficientBlock> blocks;  // row-major over block positions
  QMatrix qmatrix;

  std::size_t blockCount() const { return blocks.size(); }

  const CoefficientBlock& block(int bx, int by) const {
    return blocks[static_cast<std::size_t>(by) * static_cast<std::size_t>(blocksX) +
                  static_cast<std::size_t>(bx)];
  }
  CoefficientBlock& block(int bx, int by) {
    return blocks[static_cast<std::size_t>(by) * static_cast<std::size_t>(blocksX) +
                  static_cast<std::size_t>(bx)];
  }

  // Sub-grid of whole blocks; used for aligned windows and top-left crops.
  QuantizedBlockGrid crop(int bx0, int by0, int countX, int countY) const;

  friend bool operator==(const QuantizedBlockGrid&, const QuantizedBlockGrid&) = default;
};

// Encoded JPEG bytes.
struct JpegStream {
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const JpegStream&, const JpegStream&) = default;
};

enum class JpegErrorKind {
  MalformedMarker,  // bad marker structure, segment lengths or table contents
  Unsupported,      // valid JPEG outside the baseline single-component subset
  HuffmanDecode,    // entropy-coded data truncated or undecodable
  InvalidInput,     // encoder-side argument errors
};

const char* toString(JpegErrorKind kind);

class JpegError : public std::runtime_error {
 public:
  JpegError(JpegErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(toString(kind)) + ": " + what), kind_(kind) {}

  JpegErrorKind kind() const { return kind_; }

 private:
  JpegErrorKind kind_;
};

}  // namespace dqd

#include "dqdetect/jpeg/types.hpp"

#include <algorithm>
#include <string>

namespace dqd {

const char* toString(JpegErrorKind kind) {
  switch (kind) {
    case JpegErrorKind::MalformedMarker:
      return "malformed marker";
    case JpegErrorKind::Unsupported:
      return "unsupported stream";
    case JpegErrorKind::HuffmanDecode:
      return "huffman decode failure";
    case JpegErrorKind::InvalidInput:
      return "invalid input";
  }
  return "jpeg error";
}

QMatrix::QMatrix() { steps_.fill(1); }

QMatrix::QMatrix(std::span<const int> steps) {
  if (steps.size() != kBlockArea) {
    throw std::invalid_argument("QMatrix needs 64 steps, got " + std::to_string(steps.size()));
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i] < 1 || steps[i] > 255) {
      throw std::invalid_argument("QMatrix step " + std::to_string(i) + " out of [1,255]: " +
                                  std::to_string(steps[i]));
    }
    steps_[i] = static_cast<std::uint16_t>(steps[i]);
  }
}

QMatrix QMatrix::uniform(int step) {
  std::array<int, kBlockArea> s{};
  s.fill(step);
  return QMatrix(s);
}

namespace {

void checkDims(int w, int h) {
  if (w <= 0 || h <= 0 || w % kBlockDim != 0 || h % kBlockDim != 0) {
    throw std::invalid_argument("patch dimensions must be positive multiples of 8, got " +
                                std::to_string(w) + "x" + std::to_string(h));
  }
}

}  // namespace

PixelPatch::PixelPatch(int w, int h, std::uint8_t fill) : width(w), height(h) {
  checkDims(w, h);
  samples.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

PixelPatch::PixelPatch(int w, int h, std::vector<std::uint8_t> data)
    : width(w), height(h), samples(std::move(data)) {
  checkDims(w, h);
  if (samples.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
    throw std::invalid_argument("sample count does not match patch dimensions");
  }
}

PixelPatch PixelPatch::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || x0 + w > width || y0 + h > height) {
    throw std::out_of_range("crop outside patch");
  }
  PixelPatch out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto* src = &samples[static_cast<std::size_t>(y0 + y) * static_cast<std::size_t>(width) +
                               static_cast<std::size_t>(x0)];
    std::copy(src, src + w, &out.samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(w)]);
  }
  return out;
}

QuantizedBlockGrid QuantizedBlockGrid::crop(int bx0, int by0, int countX, int countY) const {
  if (bx0 < 0 || by0 < 0 || countX <= 0 || countY <= 0 || bx0 + countX > blocksX ||
      by0 + countY > blocksY) {
    throw std::out_of_range("block crop outside grid");
  }
  QuantizedBlockGrid out;
  out.blocksX = countX;
  out.blocksY = countY;
  out.qmatrix = qmatrix;
  out.blocks.reserve(static_cast<std::size_t>(countX) * static_cast<std::size_t>(countY));
  for (int by = by0; by < by0 + countY; ++by) {
    for (int bx = bx0; bx < bx0 + countX; ++bx) out.blocks.push_back(block(bx, by));
  }
  return out;
}

}  // namespace dqd

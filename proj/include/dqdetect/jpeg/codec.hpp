#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dqdetect/jpeg/dct.hpp"
#include "dqdetect/jpeg/types.hpp"

namespace dqd {

// Zigzag position -> natural (u * 8 + v) index.
extern const std::array<int, kBlockArea> kZigzagToNatural;

// Baseline JPEG luminance table (the quality-50 reference).
extern const std::array<int, kBlockArea> kBaseLuminanceTable;

// Header facts gathered while parsing a stream.
struct JpegInfo {
  int width = 0;
  int height = 0;
  int components = 0;
  int restartInterval = 0;
  QMatrix qmatrix;
};

// Baseline single-component stream with the standard luminance Huffman tables.
JpegStream encode(const PixelPatch& patch, const QMatrix& q);

// Entropy-code an already quantized grid as-is.
JpegStream encodeCoefficients(const QuantizedBlockGrid& grid);

// Quantized coefficients straight from the bitstream; no dequantization.
QuantizedBlockGrid decodeCoefficients(const JpegStream& stream);

JpegInfo inspect(const JpegStream& stream);

PixelPatch decodePixels(const JpegStream& stream);

// Decode to pixels and encode again with q2.
JpegStream recompress(const JpegStream& stream, const QMatrix& q2);

// A complete DQT segment (marker included): 8-bit precision, table id 0,
// entries in zigzag order.
std::vector<std::uint8_t> serializeDqt(const QMatrix& q);

// Parse the payload of a single-table DQT segment (after the length field).
QMatrix parseDqtPayload(std::span<const std::uint8_t> payload);

}  // namespace dqd

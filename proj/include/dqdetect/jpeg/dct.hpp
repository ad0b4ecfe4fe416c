#pragma once

#include <array>

#include "dqdetect/jpeg/types.hpp"

namespace dqd {

using RealBlock = std::array<double, kBlockArea>;

// Orthonormal type-II 2D DCT of a level-shifted 8x8 block (row-major, x fastest).
// Output is indexed u * 8 + v like QMatrix. Separable, double precision.
RealBlock forwardBlockTransform(const RealBlock& block);

// Exact inverse of forwardBlockTransform (type-III).
RealBlock inverseBlockTransform(const RealBlock& coeffs);

// round(F / Q) with ties away from zero.
CoefficientBlock quantize(const RealBlock& coeffs, const QMatrix& q);

// Level shift, transform and quantize every block of a patch. This is the
// reference the bitstream must reproduce.
QuantizedBlockGrid quantizePatch(const PixelPatch& patch, const QMatrix& q);

// Dequantize, inverse transform, add 128, round half away from zero, clamp.
PixelPatch reconstructPixels(const QuantizedBlockGrid& grid);

}  // namespace dqd

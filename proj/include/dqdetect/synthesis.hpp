#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqdetect/jpeg/codec.hpp"
#include "dqdetect/qmatrix.hpp"
#include "dqdetect/rng.hpp"

namespace dqd {

// Uncompressed grayscale test content: smooth illumination, low-frequency
// undulation, flat-shaded shapes with hard edges, band-limited texture and
// sensor noise, kept clear of 0/255 saturation.
PixelPatch proceduralImage(int width, int height, Rng& rng);

enum class CompressionLabel : int { Single = 0, Double = 1 };

struct LabeledPatch {
  JpegStream stream;
  CompressionLabel label = CompressionLabel::Single;
  std::string sourceId;
  std::vector<std::string> qIds;  // one for single, first then second for double
};

LabeledPatch makeSinglePatch(const PixelPatch& src, const QMatrixPool& pool, Rng& rng,
                             std::string sourceId = {});

// First and second matrices drawn independently, the second redrawn until it
// differs from the first.
LabeledPatch makeDoublePatch(const PixelPatch& src, const QMatrixPool& pool, Rng& rng,
                             std::string sourceId = {});
LabeledPatch makeDoublePatch(const PixelPatch& src, const QMatrixPool& firstPool,
                             const QMatrixPool& secondPool, Rng& rng, std::string sourceId = {});

// Balanced corpus: every source yields one single and one double patch.
// Singles draw from `finalPool`; doubles draw q1 from `firstPool`, q2 from `finalPool`.
struct CorpusSpec {
  int sources = 0;
  int patchSize = 64;
  std::uint64_t seed = 0;
  std::string sourcePrefix = "src";
};

std::vector<LabeledPatch> makePatchCorpus(const CorpusSpec& spec, const QMatrixPool& firstPool,
                                          const QMatrixPool& finalPool);

enum class Manipulation { CopyMove, Blur };

const char* toString(Manipulation m);

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct ForgeryOptions {
  int regionSize = 544;
  double blurSigma = 2.0;
  // Place the tampered region on the 8x8 grid. Copy-move sources are always
  // placed so the pasted content is off-grid relative to its new position.
  bool alignedRegion = true;
};

struct ForgeryCase {
  JpegStream forged;
  Manipulation kind = Manipulation::CopyMove;
  Rect tampered;            // destination (copy-move) or blurred region
  Rect copySource;          // copy-move only
  int maskBlocksX = 0;
  int maskBlocksY = 0;
  std::vector<std::uint8_t> mask;  // 1 = tampered 8x8 block, row-major
  std::string q1Id;
  std::string q2Id;

  nlohmann::json provenance() const;
};

ForgeryCase makeForgery(const PixelPatch& src, Manipulation kind, const QMatrixPool& firstPool,
                        const QMatrixPool& secondPool, Rng& rng, const ForgeryOptions& options = {});
ForgeryCase makeForgery(const PixelPatch& src, Manipulation kind, const QMatrixPool& pool, Rng& rng,
                        const ForgeryOptions& options = {});

// Blocks touched by any pixel of `region`.
std::vector<std::uint8_t> blockMask(int width, int height, const Rect& region);

// Separable Gaussian (radius ceil(3 sigma)) applied inside `region` only,
// mirroring at the region border.
PixelPatch blurRegion(const PixelPatch& image, const Rect& region, double sigma);

struct WindowLabels {
  std::vector<int> xs;
  std::vector<int> ys;
  std::vector<std::uint8_t> tampered;  // row-major over (ys, xs)
};

// Window is tampered when at least half of its 8x8 blocks are.
WindowLabels windowGroundTruth(const ForgeryCase& forgery, int window = 256, int stride = 32);
WindowLabels windowGroundTruth(const std::vector<std::uint8_t>& mask, int blocksX, int blocksY, int window,
                               int stride);

}  // namespace dqd

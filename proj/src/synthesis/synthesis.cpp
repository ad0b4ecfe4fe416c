#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dqdetect/synthesis.hpp"
#include "dqdetect/windows.hpp"

namespace dqd {
namespace {

const QPoolEntry& pick(const QMatrixPool& pool, Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("empty Q-matrix pool");
  return pool[static_cast<std::size_t>(rng.uniformInt(0, static_cast<std::int64_t>(pool.size()) - 1))];
}

// Second matrix differing from `first`. Throws if the pool offers none.
const QPoolEntry& pickDifferent(const QMatrixPool& pool, const QMatrix& first, Rng& rng) {
  const bool possible = std::any_of(pool.entries().begin(), pool.entries().end(),
                                    [&](const QPoolEntry& e) { return !(e.matrix == first); });
  if (!possible) throw std::invalid_argument("second pool has no matrix distinct from the first");
  for (;;) {
    const QPoolEntry& e = pick(pool, rng);
    if (!(e.matrix == first)) return e;
  }
}

void requireMultipleOf8(const PixelPatch& src) {
  if (src.width % kBlockDim != 0 || src.height % kBlockDim != 0 || src.width == 0 || src.height == 0) {
    throw std::invalid_argument("source dimensions must be positive multiples of 8");
  }
}

nlohmann::json rectJson(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}}; }

}  // namespace

LabeledPatch makeSinglePatch(const PixelPatch& src, const QMatrixPool& pool, Rng& rng, std::string sourceId) {
  requireMultipleOf8(src);
  const QPoolEntry& q = pick(pool, rng);
  LabeledPatch out;
  out.stream = encode(src, q.matrix);
  out.label = CompressionLabel::Single;
  out.sourceId = std::move(sourceId);
  out.qIds = {q.id};
  return out;
}

LabeledPatch makeDoublePatch(const PixelPatch& src, const QMatrixPool& pool, Rng& rng, std::string sourceId) {
  return makeDoublePatch(src, pool, pool, rng, std::move(sourceId));
}

LabeledPatch makeDoublePatch(const PixelPatch& src, const QMatrixPool& firstPool, const QMatrixPool& secondPool,
                             Rng& rng, std::string sourceId) {
  requireMultipleOf8(src);
  const QPoolEntry& q1 = pick(firstPool, rng);
  const QPoolEntry& q2 = pickDifferent(secondPool, q1.matrix, rng);
  LabeledPatch out;
  out.stream = recompress(encode(src, q1.matrix), q2.matrix);
  out.label = CompressionLabel::Double;
  out.sourceId = std::move(sourceId);
  out.qIds = {q1.id, q2.id};
  return out;
}

std::vector<LabeledPatch> makePatchCorpus(const CorpusSpec& spec, const QMatrixPool& firstPool,
                                          const QMatrixPool& finalPool) {
  if (spec.sources < 0) throw std::invalid_argument("negative source count");
  Rng master(spec.seed);
  std::vector<LabeledPatch> out;
  out.reserve(static_cast<std::size_t>(spec.sources) * 2);
  for (int i = 0; i < spec.sources; ++i) {
    Rng rng(master.fork());
    const std::string id = spec.sourcePrefix + std::to_string(i);
    const PixelPatch src = proceduralImage(spec.patchSize, spec.patchSize, rng);
    out.push_back(makeSinglePatch(src, finalPool, rng, id));
    out.push_back(makeDoublePatch(src, firstPool, finalPool, rng, id));
  }
  return out;
}

const char* toString(Manipulation m) {
  switch (m) {
    case Manipulation::CopyMove:
      return "copymove";
    case Manipulation::Blur:
      return "blur";
  }
  return "unknown";
}

std::vector<std::uint8_t> blockMask(int width, int height, const Rect& region) {
  const int bx = width / kBlockDim;
  const int by = height / kBlockDim;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(bx) * static_cast<std::size_t>(by), 0);
  if (region.width <= 0 || region.height <= 0) return mask;
  const int x0 = std::max(0, region.x) / kBlockDim;
  const int y0 = std::max(0, region.y) / kBlockDim;
  const int x1 = std::min(width - 1, region.x + region.width - 1) / kBlockDim;
  const int y1 = std::min(height - 1, region.y + region.height - 1) / kBlockDim;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) mask[static_cast<std::size_t>(y) * bx + x] = 1;
  }
  return mask;
}

PixelPatch blurRegion(const PixelPatch& image, const Rect& region, double sigma) {
  if (sigma <= 0) throw std::invalid_argument("blur sigma must be positive");
  if (region.x < 0 || region.y < 0 || region.width <= 0 || region.height <= 0 ||
      region.x + region.width > image.width || region.y + region.height > image.height) {
    throw std::invalid_argument("blur region outside image");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += kernel[static_cast<std::size_t>(i + radius)];
  }
  for (auto& k : kernel) k /= sum;

  const auto reflect = [](int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
  };

  const int w = region.width, h = region.height;
  std::vector<double> tmp(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * image.at(region.x + reflect(x + k, w), region.y + y);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  PixelPatch out = image;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(reflect(y + k, h)) * w + x];
      }
      out.at(region.x + x, region.y + y) = static_cast<std::uint8_t>(std::clamp(std::round(acc), 0.0, 255.0));
    }
  }
  return out;
}

nlohmann::json ForgeryCase::provenance() const {
  nlohmann::json j = {
      {"manipulation", toString(kind)},
      {"q1", q1Id},
      {"q2", q2Id},
      {"tampered_region", rectJson(tampered)},
      {"mask_blocks", {{"x", maskBlocksX}, {"y", maskBlocksY}}},
  };
  if (kind == Manipulation::CopyMove) j["copy_source"] = rectJson(copySource);
  return j;
}

ForgeryCase makeForgery(const PixelPatch& src, Manipulation kind, const QMatrixPool& pool, Rng& rng,
                        const ForgeryOptions& options) {
  return makeForgery(src, kind, pool, pool, rng, options);
}

ForgeryCase makeForgery(const PixelPatch& src, Manipulation kind, const QMatrixPool& firstPool,
                        const QMatrixPool& secondPool, Rng& rng, const ForgeryOptions& options) {
  requireMultipleOf8(src);
  const int size = options.regionSize;
  if (size <= 0 || size > src.width || size > src.height) {
    throw std::invalid_argument("forgery region does not fit in the source image");
  }
  const QPoolEntry& q1 = pick(firstPool, rng);
  const QPoolEntry& q2 = pickDifferent(secondPool, q1.matrix, rng);

  const auto place = [&](int extent, bool aligned) {
    const int maxOffset = extent - size;
    if (aligned) return static_cast<int>(rng.uniformInt(0, maxOffset / kBlockDim)) * kBlockDim;
    return static_cast<int>(rng.uniformInt(0, maxOffset));
  };

  ForgeryCase fc;
  fc.kind = kind;
  fc.q1Id = q1.id;
  fc.q2Id = q2.id;
  fc.tampered = {place(src.width, options.alignedRegion), place(src.height, options.alignedRegion), size, size};

  const PixelPatch once = decodePixels(encode(src, q1.matrix));
  PixelPatch edited = once;
  if (kind == Manipulation::Blur) {
    edited = blurRegion(once, fc.tampered, options.blurSigma);
  } else {
    // A source offset that is a multiple of 8 on both axes would carry the
    // first compression's block lattice into the pasted region.
    const int maxX = src.width - size, maxY = src.height - size;
    Rect from{0, 0, size, size};
    for (int attempt = 0;; ++attempt) {
      from.x = static_cast<int>(rng.uniformInt(0, maxX));
      from.y = static_cast<int>(rng.uniformInt(0, maxY));
      const int dx = from.x - fc.tampered.x, dy = from.y - fc.tampered.y;
      if (dx % kBlockDim != 0 || dy % kBlockDim != 0) break;
      if (attempt > 1000 || (maxX < kBlockDim && maxY < kBlockDim)) {
        throw std::invalid_argument("no off-grid copy source available for this region size");
      }
    }
    fc.copySource = from;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) edited.at(fc.tampered.x + x, fc.tampered.y + y) = once.at(from.x + x, from.y + y);
    }
  }
  fc.forged = encode(edited, q2.matrix);
  fc.maskBlocksX = src.width / kBlockDim;
  fc.maskBlocksY = src.height / kBlockDim;
  fc.mask = blockMask(src.width, src.height, fc.tampered);
  return fc;
}

WindowLabels windowGroundTruth(const ForgeryCase& forgery, int window, int stride) {
  return windowGroundTruth(forgery.mask, forgery.maskBlocksX, forgery.maskBlocksY, window, stride);
}

WindowLabels windowGroundTruth(const std::vector<std::uint8_t>& mask, int blocksX, int blocksY, int window,
                               int stride) {
  if (window % kBlockDim != 0 || stride % kBlockDim != 0) {
    throw std::invalid_argument("window and stride must be multiples of 8");
  }
  if (mask.size() != static_cast<std::size_t>(blocksX) * static_cast<std::size_t>(blocksY)) {
    throw std::invalid_argument("mask size does not match block dimensions");
  }
  WindowLabels out;
  out.xs = windowOffsets(blocksX * kBlockDim, window, stride);
  out.ys = windowOffsets(blocksY * kBlockDim, window, stride);
  const int wb = window / kBlockDim;
  const int total = wb * wb;
  for (int oy : out.ys) {
    for (int ox : out.xs) {
      int count = 0;
      for (int by = oy / kBlockDim; by < oy / kBlockDim + wb; ++by) {
        for (int bx = ox / kBlockDim; bx < ox / kBlockDim + wb; ++bx) {
          count += mask[static_cast<std::size_t>(by) * blocksX + bx];
        }
      }
      out.tampered.push_back(2 * count >= total ? 1 : 0);
    }
  }
  return out;
}

}  // namespace dqd

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dqdetect/jpeg/codec.hpp"
#include "dqdetect/localization.hpp"
#include "dqdetect/rng.hpp"
#include "dqdetect/synthesis.hpp"

using namespace dqd;

namespace {

QuantizedBlockGrid zeroGrid(int width, int height) {
  QuantizedBlockGrid g;
  g.blocksX = width / 8;
  g.blocksY = height / 8;
  g.blocks.assign(static_cast<std::size_t>(g.blocksX * g.blocksY), CoefficientBlock{});
  return g;
}

class ConstantClassifier final : public PatchClassifier {
 public:
  explicit ConstantClassifier(double p) : p_(p) {}
  std::vector<double> probabilityDouble(std::span<const QuantizedBlockGrid> grids) override {
    return std::vector<double>(grids.size(), p_);
  }

 private:
  double p_;
};

// Reads the window position from the DC term planted in each block.
class DcClassifier final : public PatchClassifier {
 public:
  std::vector<double> probabilityDouble(std::span<const QuantizedBlockGrid> grids) override {
    std::vector<double> out;
    for (const auto& g : grids) out.push_back(static_cast<double>(g.blocks[0][0]) / 1000.0);
    return out;
  }
};

// P(double) = 0 when the window is mostly tampered according to a mask.
class OracleClassifier final : public PatchClassifier {
 public:
  OracleClassifier(std::vector<std::uint8_t> mask, int blocksX) : mask_(std::move(mask)), blocksX_(blocksX) {}
  std::vector<double> probabilityDouble(std::span<const QuantizedBlockGrid> grids) override {
    std::vector<double> out;
    for (const auto& g : grids) {
      const int x0 = g.blocks[0][1], y0 = g.blocks[0][2];
      int count = 0;
      for (int y = 0; y < g.blocksY; ++y) {
        for (int x = 0; x < g.blocksX; ++x) count += mask_[static_cast<std::size_t>((y0 + y) * blocksX_ + x0 + x)];
      }
      out.push_back(2 * count >= g.blocksX * g.blocksY ? 0.0 : 1.0);
    }
    return out;
  }

 private:
  std::vector<std::uint8_t> mask_;
  int blocksX_;
};

QuantizedBlockGrid positionGrid(int width, int height) {
  QuantizedBlockGrid g = zeroGrid(width, height);
  for (int y = 0; y < g.blocksY; ++y) {
    for (int x = 0; x < g.blocksX; ++x) {
      auto& b = g.blocks[static_cast<std::size_t>(y * g.blocksX + x)];
      b[1] = x;
      b[2] = y;
    }
  }
  return g;
}

}  // namespace

TEST_CASE("window counts") {
  ConstantClassifier c(0.5);
  CHECK(localize(zeroGrid(256, 256), c).perWindow.size() == 1);
  const TamperMap m = localize(zeroGrid(1024, 1024), c);
  CHECK(m.xs.size() == 25);
  CHECK(m.ys.size() == 25);
  CHECK(m.xs.back() == 768);
  const TamperMap r = localize(zeroGrid(512, 256), c, 32, 256);
  CHECK(r.xs.size() == 9);
  CHECK(r.ys.size() == 1);
}

TEST_CASE("uneven extent gets a final window flush with the edge") {
  ConstantClassifier c(0.5);
  const TamperMap m = localize(zeroGrid(304, 256), c, 32, 256);
  REQUIRE(m.xs.size() == 3);
  CHECK(m.xs[0] == 0);
  CHECK(m.xs[1] == 32);
  CHECK(m.xs[2] == 48);
}

TEST_CASE("constant classifier gives a uniform field") {
  ConstantClassifier c(0.7);
  const TamperMap m = localize(zeroGrid(512, 384), c);
  for (double v : m.perPixel) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
  for (auto d : m.windowDecisions()) CHECK(d == 0);
}

TEST_CASE("per-pixel field is a convex combination of covering windows") {
  QuantizedBlockGrid g = zeroGrid(512, 512);
  Rng rng(3);
  for (auto& b : g.blocks) b[0] = static_cast<std::int32_t>(rng.uniformInt(0, 1000));
  DcClassifier c;
  const TamperMap m = localize(g, c, 32, 256);
  for (int y = 0; y < m.height; y += 7) {
    for (int x = 0; x < m.width; x += 7) {
      double lo = 1.0, hi = 0.0, sum = 0.0;
      int n = 0;
      for (std::size_t iy = 0; iy < m.ys.size(); ++iy) {
        for (std::size_t ix = 0; ix < m.xs.size(); ++ix) {
          if (x < m.xs[ix] || x >= m.xs[ix] + 256 || y < m.ys[iy] || y >= m.ys[iy] + 256) continue;
          const double p = m.windowProbability(static_cast<int>(ix), static_cast<int>(iy));
          lo = std::min(lo, p);
          hi = std::max(hi, p);
          sum += p;
          ++n;
        }
      }
      const double v = m.perPixel[static_cast<std::size_t>(y * m.width + x)];
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
      CHECK(v == doctest::Approx(sum / n).epsilon(1e-9));
    }
  }
}

TEST_CASE("windows receive the matching crop") {
  const QuantizedBlockGrid g = positionGrid(512, 384);
  class Recorder final : public PatchClassifier {
   public:
    std::vector<std::pair<int, int>> origins;
    std::vector<double> probabilityDouble(std::span<const QuantizedBlockGrid> grids) override {
      for (const auto& c : grids) {
        CHECK(c.blocksX == 32);
        CHECK(c.blocksY == 32);
        origins.emplace_back(c.blocks[0][1] * 8, c.blocks[0][2] * 8);
      }
      return std::vector<double>(grids.size(), 1.0);
    }
  } rec;
  const TamperMap m = localize(g, rec);
  REQUIRE(rec.origins.size() == m.xs.size() * m.ys.size());
  CHECK(rec.origins[0] == std::make_pair(0, 0));
  CHECK(rec.origins[1] == std::make_pair(32, 0));
  CHECK(rec.origins.back() == std::make_pair(m.xs.back(), m.ys.back()));
}

TEST_CASE("a perfect map scores one") {
  const std::vector<std::uint8_t> mask = blockMask(1024, 1024, Rect{240, 304, 544, 544});
  OracleClassifier oracle(mask, 128);
  const TamperMap m = localize(positionGrid(1024, 1024), oracle);
  const WindowLabels truth = windowGroundTruth(mask, 128, 128, 256, 32);
  const PrfMetrics p = prf(scoreLocalization(m, truth));
  CHECK(*p.precision == 1.0);
  CHECK(*p.recall == 1.0);
  CHECK(*p.f == 1.0);
}

TEST_CASE("flagging everything gives full recall and the tampered fraction as precision") {
  const std::vector<std::uint8_t> mask = blockMask(1024, 1024, Rect{240, 304, 544, 544});
  ConstantClassifier c(0.1);
  const TamperMap m = localize(zeroGrid(1024, 1024), c);
  const WindowLabels truth = windowGroundTruth(mask, 128, 128, 256, 32);
  const double fraction = static_cast<double>(std::count(truth.tampered.begin(), truth.tampered.end(), 1)) /
                          static_cast<double>(truth.tampered.size());
  const PrfMetrics p = prf(scoreLocalization(m, truth));
  CHECK(*p.recall == 1.0);
  CHECK(*p.precision == doctest::Approx(fraction));
}

TEST_CASE("pixel scoring against a block mask") {
  const std::vector<std::uint8_t> mask = blockMask(512, 512, Rect{0, 0, 256, 256});
  ConstantClassifier c(0.2);
  const TamperMap m = localize(zeroGrid(512, 512), c);
  const Confusion px = scorePixels(m, mask, 64, 64);
  CHECK(px.tp == 256 * 256);
  CHECK(px.fp == 512 * 512 - 256 * 256);
  CHECK(px.fn == 0);
}

TEST_CASE("bad geometry is rejected") {
  ConstantClassifier c(0.5);
  CHECK_THROWS_AS(localize(zeroGrid(128, 512), c), std::invalid_argument);
  CHECK_THROWS_AS(localize(zeroGrid(512, 512), c, 12, 256), std::invalid_argument);
  CHECK_THROWS_AS(localize(zeroGrid(512, 512), c, 32, 100), std::invalid_argument);
}

TEST_CASE("map json lists window probabilities by row") {
  ConstantClassifier c(0.25);
  const nlohmann::json j = localize(zeroGrid(320, 256), c).toJson();
  CHECK(j.at("stride") == 32);
  CHECK(j.at("p_double").size() == 1);
  CHECK(j.at("p_double")[0].size() == 3);
  CHECK(j.at("p_double")[0][2].get<double>() == 0.25);
}

TEST_CASE("localizing a real stream decodes it first") {
  Rng rng(1);
  const PixelPatch img = proceduralImage(320, 256, rng);
  ConstantClassifier c(0.9);
  const TamperMap m = localize(encode(img, standardQMatrix(80)), c);
  CHECK(m.width == 320);
  CHECK(m.xs.size() == 3);
}

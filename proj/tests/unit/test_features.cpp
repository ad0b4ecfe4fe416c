#include <doctest.h>

#include <sstream>

#include "dqdetect/features.hpp"
#include "dqdetect/jpeg/codec.hpp"
#include "dqdetect/qmatrix.hpp"
#include "dqdetect/rng.hpp"

using namespace dqd;

namespace {

QuantizedBlockGrid randomGrid(Rng& rng, int bx, int by, int spread) {
  QuantizedBlockGrid g;
  g.blocksX = bx;
  g.blocksY = by;
  g.qmatrix = standardQMatrix(static_cast<int>(rng.uniformInt(1, 100)));
  g.blocks.resize(static_cast<std::size_t>(bx * by));
  for (auto& b : g.blocks) {
    for (auto& v : b) v = static_cast<std::int32_t>(rng.uniformInt(-spread, spread));
  }
  return g;
}

// Count, for every frequency and every bin value, how many blocks hold it.
std::int32_t naiveCount(const QuantizedBlockGrid& g, int row, int value, int b) {
  std::int32_t n = 0;
  for (const auto& block : g.blocks) {
    int v = block[static_cast<std::size_t>(row)];
    if (v > b) v = b;
    if (v < -b) v = -b;
    n += v == value;
  }
  return n;
}

}  // namespace

TEST_CASE("all-zero grid puts every block in bin zero") {
  QuantizedBlockGrid g;
  g.blocksX = 3;
  g.blocksY = 2;
  g.blocks.assign(6, CoefficientBlock{});
  const HistogramSet h = buildHistograms(g, 4);
  for (int r = 0; r < 64; ++r) {
    for (int i = -4; i <= 4; ++i) CHECK(h.at(r, i) == (i == 0 ? 6 : 0));
  }
}

TEST_CASE("values beyond b saturate into the edge bins") {
  QuantizedBlockGrid g;
  g.blocksX = g.blocksY = 1;
  g.blocks.assign(1, CoefficientBlock{});
  g.blocks[0][0] = 250;
  g.blocks[0][1] = -1000;
  const HistogramSet h = buildHistograms(g, 100);
  CHECK(h.at(0, 100) == 1);
  CHECK(h.at(1, -100) == 1);
  CHECK(h.at(0, 0) == 0);
}

TEST_CASE("histograms match a naive counting oracle") {
  Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    const int b = static_cast<int>(rng.uniformInt(1, 30));
    const QuantizedBlockGrid g = randomGrid(rng, static_cast<int>(rng.uniformInt(1, 32)),
                                            static_cast<int>(rng.uniformInt(1, 32)), 40);
    const HistogramSet h = buildHistograms(g, b);
    for (int r = 0; r < 64; ++r) {
      std::int64_t rowSum = 0;
      for (int i = -b; i <= b; ++i) {
        REQUIRE(h.at(r, i) == naiveCount(g, r, i, b));
        rowSum += h.at(r, i);
      }
      REQUIRE(rowSum == static_cast<std::int64_t>(g.blockCount()));
    }
  }
}

TEST_CASE("histograms of a real 256x256 stream match the oracle") {
  Rng rng(2);
  PixelPatch p(256, 256);
  for (auto& s : p.samples) s = static_cast<std::uint8_t>(rng.uniformInt(0, 255));
  const QuantizedBlockGrid g = decodeCoefficients(encode(p, standardQMatrix(90)));
  const HistogramSet h = buildHistograms(g, 100);
  for (int r = 0; r < 64; ++r) {
    for (int i = -100; i <= 100; ++i) REQUIRE(h.at(r, i) == naiveCount(g, r, i, 100));
  }
}

TEST_CASE("Q prime rows repeat the q-factor of their frequency") {
  for (int v : buildQPrime(QMatrix::uniform(1), 2)) CHECK(v == 1);
  CHECK(buildQPrime(QMatrix::uniform(1), 2).size() == 64u * 5u);
  const QMatrix q = standardQMatrix(50);
  const auto qp = buildQPrime(q, 1);
  CHECK(qp[0] == 16);
  CHECK(qp[1] == 16);
  CHECK(qp[2] == 16);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 3; ++c) CHECK(qp[static_cast<std::size_t>(r * 3 + c)] == q[r]);
  }
}

TEST_CASE("feature tensor shapes and channels") {
  Rng rng(3);
  const QuantizedBlockGrid g = randomGrid(rng, 4, 4, 150);
  const FeatureTensor with = buildFeature(g, {100, true});
  CHECK(with.rows == 64);
  CHECK(with.cols == 201);
  CHECK(with.channels == 2);
  CHECK(with.values.size() == 64u * 201u * 2u);
  const FeatureTensor without = buildFeature(g, {100, false});
  CHECK(without.channels == 1);
  CHECK(without.values.size() == 64u * 201u);
  const HistogramSet h = buildHistograms(g, 100);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 201; ++c) {
      REQUIRE(with.at(r, c, 0) == h.at(r, c - 100));
      REQUIRE(without.at(r, c, 0) == h.at(r, c - 100));
      REQUIRE(with.at(r, c, 1) == g.qmatrix[r]);
    }
  }
}

TEST_CASE("different embedded tables change only the q channel") {
  Rng rng(4);
  QuantizedBlockGrid a = randomGrid(rng, 2, 2, 5);
  QuantizedBlockGrid b = a;
  a.qmatrix = standardQMatrix(60);
  b.qmatrix = standardQMatrix(95);
  const FeatureTensor fa = buildFeature(a, {10, true}), fb = buildFeature(b, {10, true});
  bool qDiffers = false;
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 21; ++c) {
      CHECK(fa.at(r, c, 0) == fb.at(r, c, 0));
      qDiffers |= fa.at(r, c, 1) != fb.at(r, c, 1);
    }
  }
  CHECK(qDiffers);
}

TEST_CASE("block order does not matter") {
  Rng rng(5);
  QuantizedBlockGrid g = randomGrid(rng, 8, 8, 20);
  const FeatureTensor before = buildFeature(g, {20, true});
  rng.shuffle(g.blocks);
  CHECK(buildFeature(g, {20, true}) == before);
}

TEST_CASE("network input layout and scaling") {
  Rng rng(6);
  const QuantizedBlockGrid g = randomGrid(rng, 4, 2, 3);
  const FeatureOptions raw{3, true};
  const FeatureTensor f = buildFeature(g, raw);
  std::vector<float> out(2 * 64 * 7);
  toNetworkInput(f, raw, 8, out.data());
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 7; ++c) {
      CHECK(out[static_cast<std::size_t>(r * 7 + c)] == static_cast<float>(f.at(r, c, 0)));
      CHECK(out[static_cast<std::size_t>(64 * 7 + r * 7 + c)] == static_cast<float>(f.at(r, c, 1)));
    }
  }
  const FeatureOptions unit = FeatureOptions::unitScaled(3, true);
  toNetworkInput(f, unit, 8, out.data());
  for (int r = 0; r < 64; ++r) {
    float rowSum = 0;
    for (int c = 0; c < 7; ++c) {
      rowSum += out[static_cast<std::size_t>(r * 7 + c)];
      CHECK(out[static_cast<std::size_t>(64 * 7 + r * 7 + c)] == doctest::Approx(g.qmatrix[r] / 255.0));
    }
    CHECK(rowSum == doctest::Approx(1.0));
  }
}

TEST_CASE("feature dump roundtrip") {
  Rng rng(7);
  const FeatureTensor a = buildFeature(randomGrid(rng, 3, 3, 9), {5, true});
  const FeatureTensor b = buildFeature(randomGrid(rng, 2, 5, 9), {5, false});
  std::stringstream ss;
  writeFeature(ss, a);
  writeFeature(ss, b);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 4 * (4 + a.values.size()) + 4 * (4 + b.values.size()));
  // Header is little-endian {magic, rows, cols, channels}.
  CHECK(static_cast<unsigned char>(bytes[0]) == (kFeatureMagic & 0xFF));
  CHECK(static_cast<unsigned char>(bytes[4]) == 64);
  CHECK(static_cast<unsigned char>(bytes[8]) == 11);
  CHECK(static_cast<unsigned char>(bytes[12]) == 2);
  std::stringstream in(bytes);
  const auto back = readFeatures(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);
}

TEST_CASE("feature options json") {
  const FeatureOptions o = FeatureOptions::unitScaled(20, false);
  const FeatureOptions back = FeatureOptions::fromJson(o.toJson());
  CHECK(back.b == 20);
  CHECK_FALSE(back.withQFactors);
  CHECK(back.normalizeRows);
  CHECK(back.qScale == doctest::Approx(1.0 / 255.0));
}

#include <array>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "dqdetect/jpeg/codec.hpp"
#include "huffman_tables.hpp"

namespace dqd {

const std::array<int, kBlockArea> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

const std::array<int, kBlockArea> kBaseLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

namespace {

struct Code {
  std::uint16_t bits = 0;
  std::uint8_t length = 0;
};

// Code table indexed by symbol, built from a (counts, symbols) definition.
std::array<Code, 256> buildEncodeTable(const HuffmanSpec& spec) {
  std::array<Code, 256> table{};
  std::uint16_t code = 0;
  std::size_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < spec.counts[static_cast<std::size_t>(len - 1)]; ++i) {
      table[spec.symbols[k++]] = Code{code++, static_cast<std::uint8_t>(len)};
    }
    code = static_cast<std::uint16_t>(code << 1);
  }
  return table;
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint32_t bits, int length) {
    for (int i = length - 1; i >= 0; --i) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((bits >> i) & 1U));
      if (++used_ == 8) flushByte();
    }
  }

  // Pad the final partial byte with ones.
  void finish() {
    while (used_ != 0) put(1, 1);
  }

 private:
  void flushByte() {
    out_.push_back(acc_);
    if (acc_ == 0xFF) out_.push_back(0x00);
    acc_ = 0;
    used_ = 0;
  }

  std::vector<std::uint8_t>& out_;
  std::uint8_t acc_ = 0;
  int used_ = 0;
};

int magnitudeCategory(int value) {
  int v = std::abs(value);
  int cat = 0;
  while (v != 0) {
    ++cat;
    v >>= 1;
  }
  return cat;
}

// Low `cat` bits of the JPEG value representation (ones complement for negatives).
std::uint32_t magnitudeBits(int value, int cat) {
  if (value < 0) value += (1 << cat) - 1;
  return static_cast<std::uint32_t>(value) & ((1U << cat) - 1U);
}

void putU16(std::vector<std::uint8_t>& out, int v) {
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void writeDht(std::vector<std::uint8_t>& out, int tableClass, const HuffmanSpec& spec) {
  out.push_back(0xFF);
  out.push_back(0xC4);
  putU16(out, 2 + 1 + 16 + static_cast<int>(spec.symbols.size()));
  out.push_back(static_cast<std::uint8_t>(tableClass << 4));
  for (int c : spec.counts) out.push_back(static_cast<std::uint8_t>(c));
  for (auto s : spec.symbols) out.push_back(s);
}

}  // namespace

std::vector<std::uint8_t> serializeDqt(const QMatrix& q) {
  std::vector<std::uint8_t> out = {0xFF, 0xDB, 0x00, 0x43, 0x00};
  for (int k = 0; k < kBlockArea; ++k) {
    out.push_back(static_cast<std::uint8_t>(q[kZigzagToNatural[static_cast<std::size_t>(k)]]));
  }
  return out;
}

JpegStream encodeCoefficients(const QuantizedBlockGrid& grid) {
  const int width = grid.blocksX * kBlockDim;
  const int height = grid.blocksY * kBlockDim;
  if (grid.blocksX <= 0 || grid.blocksY <= 0 || width > 65535 || height > 65535) {
    throw JpegError(JpegErrorKind::InvalidInput,
                    "grid size " + std::to_string(grid.blocksX) + "x" + std::to_string(grid.blocksY));
  }
  if (grid.blocks.size() !=
      static_cast<std::size_t>(grid.blocksX) * static_cast<std::size_t>(grid.blocksY)) {
    throw JpegError(JpegErrorKind::InvalidInput, "block count does not match grid size");
  }

  std::vector<std::uint8_t> out = {0xFF, 0xD8};
  // APP0 JFIF 1.01, no thumbnail.
  const std::uint8_t app0[] = {0xFF, 0xE0, 0x00, 0x10, 'J',  'F',  'I',  'F', 0x00,
                               0x01, 0x01, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00};
  out.insert(out.end(), std::begin(app0), std::end(app0));
  const auto dqt = serializeDqt(grid.qmatrix);
  out.insert(out.end(), dqt.begin(), dqt.end());

  // SOF0: 8-bit, one component id 1, sampling 1x1, table 0.
  out.insert(out.end(), {0xFF, 0xC0, 0x00, 0x0B, 0x08});
  putU16(out, height);
  putU16(out, width);
  out.insert(out.end(), {0x01, 0x01, 0x11, 0x00});

  writeDht(out, 0, kStdDcLuminance);
  writeDht(out, 1, kStdAcLuminance);

  out.insert(out.end(), {0xFF, 0xDA, 0x00, 0x08, 0x01, 0x01, 0x00, 0x00, 0x3F, 0x00});

  static const auto dcCodes = buildEncodeTable(kStdDcLuminance);
  static const auto acCodes = buildEncodeTable(kStdAcLuminance);

  BitWriter writer(out);
  int prevDc = 0;
  for (const auto& block : grid.blocks) {
    const int diff = block[0] - prevDc;
    prevDc = block[0];
    const int dcCat = magnitudeCategory(diff);
    if (dcCat > 11) throw JpegError(JpegErrorKind::InvalidInput, "DC difference out of baseline range");
    writer.put(dcCodes[static_cast<std::size_t>(dcCat)].bits, dcCodes[static_cast<std::size_t>(dcCat)].length);
    writer.put(magnitudeBits(diff, dcCat), dcCat);

    int run = 0;
    for (int k = 1; k < kBlockArea; ++k) {
      const int v = block[static_cast<std::size_t>(kZigzagToNatural[static_cast<std::size_t>(k)])];
      if (v == 0) {
        ++run;
        continue;
      }
      while (run > 15) {
        writer.put(acCodes[0xF0].bits, acCodes[0xF0].length);
        run -= 16;
      }
      const int cat = magnitudeCategory(v);
      if (cat > 10) throw JpegError(JpegErrorKind::InvalidInput, "AC coefficient out of baseline range");
      const auto& code = acCodes[static_cast<std::size_t>((run << 4) | cat)];
      writer.put(code.bits, code.length);
      writer.put(magnitudeBits(v, cat), cat);
      run = 0;
    }
    if (run > 0) writer.put(acCodes[0x00].bits, acCodes[0x00].length);
  }
  writer.finish();

  out.push_back(0xFF);
  out.push_back(0xD9);
  return JpegStream{std::move(out)};
}

JpegStream encode(const PixelPatch& patch, const QMatrix& q) {
  if (patch.width <= 0 || patch.height <= 0 || patch.width % kBlockDim != 0 ||
      patch.height % kBlockDim != 0) {
    throw JpegError(JpegErrorKind::InvalidInput, "patch dimensions must be multiples of 8");
  }
  return encodeCoefficients(quantizePatch(patch, q));
}

JpegStream recompress(const JpegStream& stream, const QMatrix& q2) {
  return encode(decodePixels(stream), q2);
}

}  // namespace dqd

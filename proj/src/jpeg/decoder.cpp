#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqdetect/jpeg/codec.hpp"

namespace dqd {
namespace {

[[noreturn]] void fail(JpegErrorKind kind, const std::string& what) { throw JpegError(kind, what); }

// Canonical Huffman table in the form of ITU T.81 Annex F.2.2.3.
struct HuffmanTable {
  std::array<int, 17> minCode{};
  std::array<int, 17> maxCode{};  // -1 where no codes of that length
  std::array<int, 17> valPtr{};
  std::vector<std::uint8_t> symbols;

  static HuffmanTable build(std::span<const std::uint8_t, 16> counts,
                            std::span<const std::uint8_t> symbols) {
    HuffmanTable t;
    t.symbols.assign(symbols.begin(), symbols.end());
    int code = 0;
    int k = 0;
    for (int len = 1; len <= 16; ++len) {
      const int n = counts[static_cast<std::size_t>(len - 1)];
      if (n == 0) {
        t.maxCode[static_cast<std::size_t>(len)] = -1;
      } else {
        t.valPtr[static_cast<std::size_t>(len)] = k;
        t.minCode[static_cast<std::size_t>(len)] = code;
        code += n;
        k += n;
        t.maxCode[static_cast<std::size_t>(len)] = code - 1;
      }
      if (code > (1 << len)) fail(JpegErrorKind::MalformedMarker, "over-subscribed Huffman table");
      code <<= 1;
    }
    return t;
  }
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::uint8_t u8() {
    if (pos_ >= data_.size()) fail(JpegErrorKind::MalformedMarker, "unexpected end of stream");
    return data_[pos_++];
  }
  int u16() {
    const int hi = u8();
    return (hi << 8) | u8();
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) fail(JpegErrorKind::MalformedMarker, "segment exceeds stream");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  // Next marker code, skipping 0xFF fill bytes. Bytes before the marker are an error.
  int marker() {
    if (u8() != 0xFF) fail(JpegErrorKind::MalformedMarker, "expected marker");
    std::uint8_t code;
    do {
      code = u8();
    } while (code == 0xFF);
    if (code == 0x00) fail(JpegErrorKind::MalformedMarker, "stuffed zero where marker expected");
    return code;
  }

  std::span<const std::uint8_t> data() const { return data_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// Reads entropy-coded bits, undoing byte stuffing. Hitting a marker or the end
// of the data while bits are still needed is a decode failure.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> data, std::size_t start) : data_(data), pos_(start) {}

  int bit() {
    if (bitsLeft_ == 0) fetch();
    --bitsLeft_;
    return (current_ >> bitsLeft_) & 1;
  }

  int bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bit();
    return v;
  }

  int decode(const HuffmanTable& t) {
    int code = 0;
    for (int len = 1; len <= 16; ++len) {
      code = (code << 1) | bit();
      const auto l = static_cast<std::size_t>(len);
      if (t.maxCode[l] >= 0 && code <= t.maxCode[l] && code >= t.minCode[l]) {
        const auto idx = static_cast<std::size_t>(t.valPtr[l] + code - t.minCode[l]);
        if (idx >= t.symbols.size()) fail(JpegErrorKind::HuffmanDecode, "code maps past symbol list");
        return t.symbols[idx];
      }
    }
    fail(JpegErrorKind::HuffmanDecode, "invalid Huffman code");
  }

  // Discard leftover bits and consume an RSTn marker.
  void restart(int expected) {
    bitsLeft_ = 0;
    while (pos_ < data_.size() && data_[pos_] == 0xFF && pos_ + 1 < data_.size() &&
           data_[pos_ + 1] == 0xFF) {
      ++pos_;
    }
    if (pos_ + 1 >= data_.size() || data_[pos_] != 0xFF || data_[pos_ + 1] != 0xD0 + expected) {
      fail(JpegErrorKind::HuffmanDecode, "missing restart marker");
    }
    pos_ += 2;
  }

  // Byte offset of the first marker after the scan.
  std::size_t endOfScan() const {
    std::size_t p = pos_;
    while (p + 1 < data_.size()) {
      if (data_[p] == 0xFF && data_[p + 1] != 0x00 && data_[p + 1] != 0xFF &&
          !(data_[p + 1] >= 0xD0 && data_[p + 1] <= 0xD7)) {
        return p;
      }
      ++p;
    }
    fail(JpegErrorKind::MalformedMarker, "no marker after scan data");
  }

 private:
  void fetch() {
    for (;;) {
      if (pos_ >= data_.size()) fail(JpegErrorKind::HuffmanDecode, "scan data truncated");
      const std::uint8_t b = data_[pos_];
      if (b != 0xFF) {
        current_ = b;
        ++pos_;
        break;
      }
      if (pos_ + 1 >= data_.size()) fail(JpegErrorKind::HuffmanDecode, "scan data truncated");
      const std::uint8_t next = data_[pos_ + 1];
      if (next == 0x00) {
        current_ = 0xFF;
        pos_ += 2;
        break;
      }
      if (next == 0xFF) {  // fill byte
        ++pos_;
        continue;
      }
      fail(JpegErrorKind::HuffmanDecode, "scan data truncated by marker");
    }
    bitsLeft_ = 8;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_;
  int current_ = 0;
  int bitsLeft_ = 0;
};

int extend(int v, int cat) { return v < (1 << (cat - 1)) ? v - (1 << cat) + 1 : v; }

struct ParsedStream {
  JpegInfo info;
  QuantizedBlockGrid grid;
};

ParsedStream parse(const JpegStream& stream, bool decodeScan) {
  ByteReader r(stream.bytes);
  if (r.marker() != 0xD8) fail(JpegErrorKind::MalformedMarker, "missing SOI");

  std::array<std::optional<QMatrix>, 4> qtables;
  std::array<std::optional<HuffmanTable>, 4> dcTables;
  std::array<std::optional<HuffmanTable>, 4> acTables;
  bool haveFrame = false;
  bool haveScan = false;
  int componentId = 0;
  int componentTable = 0;
  ParsedStream out;

  for (;;) {
    const int m = r.marker();
    if (m == 0xD9) break;  // EOI
    if (m == 0xD8) fail(JpegErrorKind::MalformedMarker, "duplicate SOI");
    if (m >= 0xD0 && m <= 0xD7) fail(JpegErrorKind::MalformedMarker, "restart marker outside scan");
    if (m == 0x01) continue;  // TEM has no length

    const int len = r.u16();
    if (len < 2) fail(JpegErrorKind::MalformedMarker, "segment length below 2");
    ByteReader seg(r.take(static_cast<std::size_t>(len - 2)));

    switch (m) {
      case 0xDB: {  // DQT
        while (seg.remaining() > 0) {
          const int pq = seg.u8();
          const int precision = pq >> 4;
          const int id = pq & 0x0F;
          if (precision > 1 || id > 3) fail(JpegErrorKind::MalformedMarker, "bad DQT table spec");
          std::array<int, kBlockArea> steps{};
          for (int k = 0; k < kBlockArea; ++k) {
            const int v = precision == 0 ? seg.u8() : seg.u16();
            if (v == 0) fail(JpegErrorKind::MalformedMarker, "zero quantization step");
            if (v > 255) fail(JpegErrorKind::Unsupported, "quantization step above 255");
            steps[static_cast<std::size_t>(kZigzagToNatural[static_cast<std::size_t>(k)])] = v;
          }
          qtables[static_cast<std::size_t>(id)] = QMatrix(steps);
        }
        break;
      }
      case 0xC4: {  // DHT
        while (seg.remaining() > 0) {
          const int tc = seg.u8();
          const int cls = tc >> 4;
          const int id = tc & 0x0F;
          if (cls > 1 || id > 3) fail(JpegErrorKind::MalformedMarker, "bad DHT table spec");
          auto countsSpan = seg.take(16);
          std::size_t total = 0;
          for (auto c : countsSpan) total += c;
          if (total > 256) fail(JpegErrorKind::MalformedMarker, "DHT symbol count above 256");
          auto symbols = seg.take(total);
          auto table = HuffmanTable::build(countsSpan.first<16>(), symbols);
          (cls == 0 ? dcTables : acTables)[static_cast<std::size_t>(id)] = std::move(table);
        }
        break;
      }
      case 0xC0: {  // SOF0
        if (haveFrame) fail(JpegErrorKind::MalformedMarker, "second frame header");
        if (seg.u8() != 8) fail(JpegErrorKind::Unsupported, "sample precision other than 8 bits");
        out.info.height = seg.u16();
        out.info.width = seg.u16();
        out.info.components = seg.u8();
        if (out.info.components != 1) {
          fail(JpegErrorKind::Unsupported,
               std::to_string(out.info.components) + " components; only single-component streams");
        }
        componentId = seg.u8();
        seg.u8();  // sampling factors are irrelevant for one component
        componentTable = seg.u8();
        if (componentTable > 3) fail(JpegErrorKind::MalformedMarker, "bad quantization table id");
        if (out.info.width == 0 || out.info.height == 0) {
          fail(JpegErrorKind::Unsupported, "zero image dimension");
        }
        if (out.info.width % kBlockDim != 0 || out.info.height % kBlockDim != 0) {
          fail(JpegErrorKind::Unsupported, "image dimensions not multiples of 8");
        }
        haveFrame = true;
        break;
      }
      case 0xC1: case 0xC3: case 0xC5: case 0xC6: case 0xC7:
      case 0xC9: case 0xCA: case 0xCB: case 0xCD: case 0xCE: case 0xCF:
        fail(JpegErrorKind::Unsupported, "non-baseline frame type");
      case 0xC2:
        fail(JpegErrorKind::Unsupported, "progressive JPEG");
      case 0xDD: {  // DRI
        out.info.restartInterval = seg.u16();
        break;
      }
      case 0xDA: {  // SOS
        if (!haveFrame) fail(JpegErrorKind::MalformedMarker, "scan before frame header");
        if (haveScan) fail(JpegErrorKind::Unsupported, "multiple scans");
        if (seg.u8() != 1) fail(JpegErrorKind::Unsupported, "interleaved scan");
        if (seg.u8() != componentId) fail(JpegErrorKind::MalformedMarker, "scan references unknown component");
        const int tables = seg.u8();
        const int ss = seg.u8();
        const int se = seg.u8();
        const int a = seg.u8();
        if (ss != 0 || se != 63 || a != 0) fail(JpegErrorKind::Unsupported, "non-sequential scan parameters");
        const auto& dc = dcTables[static_cast<std::size_t>((tables >> 4) & 3)];
        const auto& ac = acTables[static_cast<std::size_t>(tables & 3)];
        if ((tables >> 4) > 3 || (tables & 0x0F) > 3 || !dc || !ac) {
          fail(JpegErrorKind::MalformedMarker, "scan references undefined Huffman table");
        }
        const auto& q = qtables[static_cast<std::size_t>(componentTable)];
        if (!q) fail(JpegErrorKind::MalformedMarker, "frame references undefined quantization table");
        out.info.qmatrix = *q;
        haveScan = true;

        auto& grid = out.grid;
        grid.blocksX = out.info.width / kBlockDim;
        grid.blocksY = out.info.height / kBlockDim;
        grid.qmatrix = *q;
        const std::size_t total =
            static_cast<std::size_t>(grid.blocksX) * static_cast<std::size_t>(grid.blocksY);
        if (!decodeScan) {
          // Header only: skip to the next marker without decoding.
          BitReader bits(r.data(), r.pos());
          r.seek(bits.endOfScan());
          break;
        }
        // Every block costs at least two bits, so the scan size bounds the allocation.
        grid.blocks.reserve(std::min(total, r.remaining() * 4 + 1));
        BitReader bits(r.data(), r.pos());
        int pred = 0;
        int restartIndex = 0;
        for (std::size_t n = 0; n < total; ++n) {
          if (out.info.restartInterval > 0 && n > 0 &&
              n % static_cast<std::size_t>(out.info.restartInterval) == 0) {
            bits.restart(restartIndex);
            restartIndex = (restartIndex + 1) & 7;
            pred = 0;
          }
          CoefficientBlock block{};
          const int dcCat = bits.decode(*dc);
          if (dcCat > 15) fail(JpegErrorKind::HuffmanDecode, "DC category above 15");
          if (dcCat > 0) pred += extend(bits.bits(dcCat), dcCat);
          if (pred < -32767 || pred > 32767) fail(JpegErrorKind::HuffmanDecode, "DC value out of range");
          block[0] = pred;
          for (int k = 1; k < kBlockArea;) {
            const int rs = bits.decode(*ac);
            const int run = rs >> 4;
            const int cat = rs & 0x0F;
            if (cat == 0) {
              if (run != 15) break;  // EOB
              k += 16;
              continue;
            }
            k += run;
            if (k >= kBlockArea) fail(JpegErrorKind::HuffmanDecode, "AC run past end of block");
            block[static_cast<std::size_t>(kZigzagToNatural[static_cast<std::size_t>(k)])] =
                extend(bits.bits(cat), cat);
            ++k;
          }
          grid.blocks.push_back(block);
        }
        r.seek(bits.endOfScan());
        break;
      }
      default:
        break;  // APPn, COM and anything else with a length is skipped
    }
  }

  if (!haveFrame) fail(JpegErrorKind::MalformedMarker, "missing frame header");
  if (!haveScan) fail(JpegErrorKind::MalformedMarker, "missing scan");
  return out;
}

}  // namespace

QMatrix parseDqtPayload(std::span<const std::uint8_t> payload) {
  if (payload.size() != 1 + kBlockArea || payload[0] != 0x00) {
    fail(JpegErrorKind::MalformedMarker, "expected one 8-bit DQT table");
  }
  std::array<int, kBlockArea> steps{};
  for (int k = 0; k < kBlockArea; ++k) {
    const int v = payload[static_cast<std::size_t>(k + 1)];
    if (v == 0) fail(JpegErrorKind::MalformedMarker, "zero quantization step");
    steps[static_cast<std::size_t>(kZigzagToNatural[static_cast<std::size_t>(k)])] = v;
  }
  return QMatrix(steps);
}

JpegInfo inspect(const JpegStream& stream) { return parse(stream, false).info; }

QuantizedBlockGrid decodeCoefficients(const JpegStream& stream) {
  return std::move(parse(stream, true).grid);
}

PixelPatch decodePixels(const JpegStream& stream) {
  return reconstructPixels(decodeCoefficients(stream));
}

}  // namespace dqd

#include "dqdetect/image_io.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace dqd {

std::vector<std::uint8_t> readBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

JpegStream readJpeg(const std::filesystem::path& path) { return JpegStream{readBytes(path)}; }

void writeJpeg(const std::filesystem::path& path, const JpegStream& stream) { writeBytes(path, stream.bytes); }

void writePgm(const std::filesystem::path& path, int width, int height, std::span<const std::uint8_t> samples) {
  if (samples.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("PGM sample count does not match size");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(samples.data()), static_cast<std::streamsize>(samples.size()));
}

GrayImage readPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error(path.string() + ": only binary PGM (P5) is supported");
  auto next = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
    int v = -1;
    in >> v;
    return v;
  };
  GrayImage img;
  img.width = next();
  img.height = next();
  const int maxval = next();
  if (img.width <= 0 || img.height <= 0 || maxval != 255) {
    throw std::runtime_error(path.string() + ": unsupported PGM header");
  }
  in.get();
  img.samples.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  if (!in.read(reinterpret_cast<char*>(img.samples.data()), static_cast<std::streamsize>(img.samples.size()))) {
    throw std::runtime_error(path.string() + ": truncated PGM data");
  }
  return img;
}

}  // namespace dqd

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dqdetect/jpeg/types.hpp"

namespace dqd {

std::vector<std::uint8_t> readBytes(const std::filesystem::path& path);
void writeBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

JpegStream readJpeg(const std::filesystem::path& path);
void writeJpeg(const std::filesystem::path& path, const JpegStream& stream);

// Binary 8-bit PGM (P5, maxval 255).
void writePgm(const std::filesystem::path& path, int width, int height, std::span<const std::uint8_t> samples);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;
};

GrayImage readPgm(const std::filesystem::path& path);

}  // namespace dqd

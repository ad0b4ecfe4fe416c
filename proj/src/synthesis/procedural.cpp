#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dqdetect/synthesis.hpp"

namespace dqd {
namespace {

// White noise on a coarse lattice, bilinearly upsampled.
void addSmoothNoise(std::vector<double>& img, int width, int height, int cell, double amplitude, Rng& rng) {
  const int gw = width / cell + 2;
  const int gh = height / cell + 2;
  std::vector<double> grid(static_cast<std::size_t>(gw) * static_cast<std::size_t>(gh));
  for (auto& g : grid) g = rng.normal() * amplitude;
  for (int y = 0; y < height; ++y) {
    const double fy = static_cast<double>(y) / cell;
    const int y0 = static_cast<int>(fy);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) / cell;
      const int x0 = static_cast<int>(fx);
      const double tx = fx - x0;
      auto g = [&](int gx, int gy) { return grid[static_cast<std::size_t>(gy) * gw + static_cast<std::size_t>(gx)]; };
      const double top = g(x0, y0) * (1 - tx) + g(x0 + 1, y0) * tx;
      const double bottom = g(x0, y0 + 1) * (1 - tx) + g(x0 + 1, y0 + 1) * tx;
      img[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] += top * (1 - ty) + bottom * ty;
    }
  }
}

}  // namespace

PixelPatch proceduralImage(int width, int height, Rng& rng) {
  std::vector<double> img(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  const double scale = std::max(width, height);

  // Illumination gradient.
  const double base = rng.uniform(70, 180);
  const double gx = rng.uniform(-60, 60) / scale;
  const double gy = rng.uniform(-60, 60) / scale;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) img[static_cast<std::size_t>(y) * width + x] = base + gx * x + gy * y;
  }

  // Low-frequency undulation.
  const int waves = static_cast<int>(rng.uniformInt(1, 3));
  for (int i = 0; i < waves; ++i) {
    const double theta = rng.uniform(0, std::numbers::pi);
    const double wavelength = rng.uniform(0.3, 1.5) * scale;
    const double amp = rng.uniform(5, 25);
    const double phase = rng.uniform(0, 2 * std::numbers::pi);
    const double kx = std::cos(theta) * 2 * std::numbers::pi / wavelength;
    const double ky = std::sin(theta) * 2 * std::numbers::pi / wavelength;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) img[static_cast<std::size_t>(y) * width + x] += amp * std::sin(kx * x + ky * y + phase);
    }
  }

  // Flat shapes with hard edges, some carrying a stripe texture.
  const int shapes = static_cast<int>(rng.uniformInt(2, 6));
  for (int i = 0; i < shapes; ++i) {
    const double cx = rng.uniform(0, width);
    const double cy = rng.uniform(0, height);
    const double rx = rng.uniform(0.05, 0.35) * scale;
    const double ry = rng.uniform(0.05, 0.35) * scale;
    const double offset = rng.uniform(-50, 50);
    const bool ellipse = rng.uniform() < 0.5;
    const bool striped = rng.uniform() < 0.4;
    const double stripeAngle = rng.uniform(0, std::numbers::pi);
    const double stripePeriod = rng.uniform(3, 24);
    const double stripeAmp = rng.uniform(4, 18);
    const int x0 = std::max(0, static_cast<int>(cx - rx));
    const int x1 = std::min(width - 1, static_cast<int>(cx + rx));
    const int y0 = std::max(0, static_cast<int>(cy - ry));
    const int y1 = std::min(height - 1, static_cast<int>(cy + ry));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (ellipse) {
          const double dx = (x - cx) / rx, dy = (y - cy) / ry;
          if (dx * dx + dy * dy > 1.0) continue;
        }
        double v = offset;
        if (striped) {
          const double t = (std::cos(stripeAngle) * x + std::sin(stripeAngle) * y) / stripePeriod;
          v += stripeAmp * std::sin(2 * std::numbers::pi * t);
        }
        img[static_cast<std::size_t>(y) * width + x] += v;
      }
    }
  }

  // Band-limited texture at a couple of scales.
  addSmoothNoise(img, width, height, static_cast<int>(rng.uniformInt(1, 3)), rng.uniform(6, 20), rng);
  addSmoothNoise(img, width, height, static_cast<int>(rng.uniformInt(8, 24)), rng.uniform(4, 14), rng);

  // Fit into [12, 243] and add sensor noise.
  const auto [mn, mx] = std::minmax_element(img.begin(), img.end());
  const double lo = *mn, hi = *mx;
  const double gain = hi - lo > 231.0 ? 231.0 / (hi - lo) : 1.0;
  const double shift = hi - lo > 231.0 ? 12.0 - lo * gain : std::clamp(lo, 12.0, 243.0 - (hi - lo)) - lo;
  const double sigma = rng.uniform(1.0, 3.5);
  PixelPatch out(width, height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = img[i] * gain + shift + rng.normal() * sigma;
    out.samples[i] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  }
  return out;
}

}  // namespace dqd

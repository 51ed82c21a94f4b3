#include "ewt/figures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

namespace ewt {

namespace {

// 5x7 glyphs, one byte per row, bit 4 is the leftmost column.
const std::map<char, std::array<std::uint8_t, 7>>& glyphs() {
  static const std::map<char, std::array<std::uint8_t, 7>> g = {
      {'0', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}}, {'1', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},
      {'2', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f}}, {'3', {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},
      {'4', {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}}, {'5', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},
      {'6', {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}}, {'7', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}}, {'9', {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}}, {'-', {0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00}},
      {'+', {0x00, 0x04, 0x04, 0x1f, 0x04, 0x04, 0x00}}, {'=', {0x00, 0x00, 0x1f, 0x00, 0x1f, 0x00, 0x00}},
      {'e', {0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e}}, {'E', {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f}},
      {'n', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}}, {' ', {0, 0, 0, 0, 0, 0, 0}},
  };
  return g;
}

void put(RgbImage& img, int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  auto* p = img.at(x, y);
  p[0] = r;
  p[1] = g;
  p[2] = b;
}

std::uint8_t gray_level(double v, double lo, double hi) {
  const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
  // keep gray strictly below pure red's channels so marks stay countable
  return static_cast<std::uint8_t>(std::lround(std::clamp(t, 0.0, 1.0) * 254.0));
}

}  // namespace

void draw_text(RgbImage& img, int x, int y, const std::string& text, int scale) {
  const auto& g = glyphs();
  int cx = x;
  for (char c : text) {
    auto it = g.find(c);
    if (it == g.end()) throw ValidationError(std::string("no glyph for '") + c + "'");
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (it->second[static_cast<std::size_t>(row)] & (0x10 >> col))
          for (int sy = 0; sy < scale; ++sy)
            for (int sx = 0; sx < scale; ++sx) put(img, cx + col * scale + sx, y + row * scale + sy, 255, 255, 0);
    cx += 6 * scale;
  }
}

RgbImage partition_overlay(const RealImage& log_spec, const PartitionLabelMap& p) {
  if (!log_spec.same_shape(p.width, p.height)) throw ValidationError("spectrum and partition differ in size");
  if (!p.boundary.same_shape(p.width, p.height)) throw ValidationError("partition has no boundary mask");
  const auto [lo, hi] = std::minmax_element(log_spec.data.begin(), log_spec.data.end());
  RgbImage out(p.width, p.height);
  for (int j = 0; j < p.height; ++j)
    for (int i = 0; i < p.width; ++i) {
      if (p.boundary(i, j)) {
        put(out, i, j, 255, 0, 0);
      } else {
        const auto v = gray_level(log_spec(i, j), *lo, *hi);
        put(out, i, j, v, v, v);
      }
    }
  return out;
}

RgbImage preimage_comparison(const RegionMask& region, const Diffeomorphism& map, const KernelSupport& support) {
  const FrequencyGrid g = grid_of(region.mask);
  RgbImage out(g.width(), g.height());
  for (int j = 0; j < g.height(); ++j)
    for (int i = 0; i < g.width(); ++i) {
      const bool in_region = region.mask(i, j) != 0;
      const bool in_pre = support.contains(map(g.xi(i, j)));
      if (in_region && in_pre)
        put(out, i, j, 255, 255, 255);
      else if (in_region)
        put(out, i, j, 0, 0, 255);
      else if (in_pre)
        put(out, i, j, 255, 0, 0);
    }
  return out;
}

std::string energy_label(int index, double energy) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "n=%d E=%.4e", index, energy);
  return buf;
}

RgbImage band_panel(const RealImage& spectrum, int index, double energy) {
  constexpr int strip = 12;
  const std::string label = energy_label(index, energy);
  const int width = std::max(spectrum.width, 6 * static_cast<int>(label.size()) + 4);
  RgbImage out(width, spectrum.height + strip);
  const auto [lo, hi] = std::minmax_element(spectrum.data.begin(), spectrum.data.end());
  for (int y = 0; y < spectrum.height; ++y)
    for (int x = 0; x < spectrum.width; ++x) {
      const auto v = gray_level(spectrum(x, y), *lo, *hi);
      put(out, x, y + strip, v, v, v);
    }
  draw_text(out, 2, 2, label);
  return out;
}

std::size_t count_marked(const RgbImage& img) {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 2 < img.data.size(); k += 3)
    if (img.data[k] == 255 && img.data[k + 1] == 0 && img.data[k + 2] == 0) ++n;
  return n;
}

}  // namespace ewt

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewt/spectral.hpp"

namespace ewt {

/// 8-bit RGB raster for figure output.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  ///< r, g, b per pixel, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  std::uint8_t* at(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* at(int x, int y) const { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
};

/// Grayscale input by content: PGM (P2/P5, 8 or 16 bit), PNG, PFM (Pf) or
/// EWT1 with one channel. Integer formats are returned in [0, 1].
RealImage read_image(const std::filesystem::path& path);

RealImage read_pgm(const std::filesystem::path& path);
RealImage read_png(const std::filesystem::path& path);
RealImage read_pfm(const std::filesystem::path& path);

/// Linear rescale of [lo, hi] onto the full integer range; lo == hi maps to 0.
void write_pgm(const std::filesystem::path& path, const RealImage& img, int bits = 16);
void write_png(const std::filesystem::path& path, const RealImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
void write_pfm(const std::filesystem::path& path, const RealImage& img);

/// EWT1 raster: "EWT1", u32 width, height, channels, then little-endian f64
/// samples row-major, channels interleaved.
void write_ewt1(const std::filesystem::path& path, const RealImage& img);
void write_ewt1(const std::filesystem::path& path, const ComplexField& field);
RealImage read_ewt1_real(const std::filesystem::path& path);
ComplexField read_ewt1_complex(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
/// Two-space indented dump with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace ewt

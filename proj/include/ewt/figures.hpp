#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewt/io.hpp"
#include "ewt/kernels.hpp"
#include "ewt/mapping.hpp"
#include "ewt/partition.hpp"

namespace ewt {

/// Log spectrum in gray with partition boundary samples in red.
RgbImage partition_overlay(const RealImage& log_spec, const PartitionLabelMap& p);

/// Region samples only in blue, gamma^{-1}(Lambda) only in red, both in white.
RgbImage preimage_comparison(const RegionMask& region, const Diffeomorphism& map, const KernelSupport& support);

/// Wavelet spectrum under a caption strip showing the band index and E_n.
RgbImage band_panel(const RealImage& spectrum, int index, double energy);

/// Caption used on band panels.
std::string energy_label(int index, double energy);

/// Draws text in a 5x7 bitmap font (digits, a few letters, . - + =).
void draw_text(RgbImage& img, int x, int y, const std::string& text, int scale = 1);

/// Number of pure red pixels.
std::size_t count_marked(const RgbImage& img);

}  // namespace ewt

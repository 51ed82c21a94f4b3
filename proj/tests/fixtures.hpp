#pragma once

// Banks with known structure shared by the unit and acceptance tests.

#include <vector>

#include "ewt/filterbank.hpp"
#include "oracles.hpp"

namespace fixture {

/// Shannon bank on a cells x cells lattice of boxes covering the grid, one
/// affine filter per box, border boxes mapped with margin 1.
inline ewt::FilterBank shannon_box_bank(const ewt::FrequencyGrid& g, int cells,
                                        ewt::FilterNormalization norm = ewt::FilterNormalization::Unit) {
  auto k = ewt::make_shannon_kernel();
  const int bw = g.width() / cells, bh = g.height() / cells;
  std::vector<ewt::EmpiricalFilter> fs;
  for (int cy = 0; cy < cells; ++cy)
    for (int cx = 0; cx < cells; ++cx) {
      const int n = cy * cells + cx;
      auto r = oracle::region_from(g, n, [&](ewt::Vec2 xi) {
        const int i = static_cast<int>(std::lround(xi.x * g.width())) + g.width() / 2;
        const int j = static_cast<int>(std::lround(xi.y * g.height())) + g.height() / 2;
        return i / bw == cx && j / bh == cy;
      });
      fs.push_back(ewt::build_filter(k, ewt::affine_map_for_region(r, k.support, 1.0), g, n, norm));
    }
  auto bank = ewt::make_bank(std::move(fs));
  bank.kernel = k.name;
  bank.compact = true;
  return bank;
}

/// Point-symmetric 5x5 lattice of cells, cell(o) = sign(o) floor((|o| + q) / 2q)
/// with q = size / 8. Gabor affine filters; negative indices use mirrored maps.
inline ewt::FilterBank gabor_lattice_bank(const ewt::FrequencyGrid& g) {
  auto k = ewt::make_gabor_kernel();
  auto cell = [](int o, int size) {
    const int q = size / 8;
    const int c = (std::abs(o) + q) / (2 * q);
    return o < 0 ? -c : c;
  };
  std::vector<ewt::EmpiricalFilter> fs;
  int n = 0;
  for (int cy = 0; cy <= 2; ++cy)
    for (int cx = -2; cx <= 2; ++cx) {
      if (cy == 0 && cx < 0) continue;
      auto cell_region = [&](int ax, int ay) {
        return oracle::region_from(g, n, [&](ewt::Vec2 xi) {
          const int oi = static_cast<int>(std::lround(xi.x * g.width()));
          const int oj = static_cast<int>(std::lround(xi.y * g.height()));
          return cell(oi, g.width()) == ax && cell(oj, g.height()) == ay;
        });
      };
      auto m = ewt::affine_map_for_pair(cell_region(cx, cy), cell_region(-cx, -cy), k.support);
      fs.push_back(ewt::build_filter(k, m, g, n));
      if (n != 0) fs.push_back(ewt::build_filter(k, m.mirrored(), g, -n));
      ++n;
    }
  auto bank = ewt::make_bank(std::move(fs));
  bank.kernel = k.name;
  return bank;
}

}  // namespace fixture

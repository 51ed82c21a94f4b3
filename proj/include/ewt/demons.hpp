#pragma once

#include <vector>

#include "ewt/mapping.hpp"

namespace ewt {

struct MappingFitParams {
  std::vector<double> smoothing = {0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7};
  /// Pyramid depths to try; empty means {n_P - 2, n_P - 1, n_P} of the canvas.
  std::vector<int> levels;
  int min_canvas = 32;
  int max_canvas = 128;
  double unbounded_margin = 1.25;

  void validate() const;
};

/// Largest n with 2^n < size.
int pyramid_depth(int size);

/// Iterations per pyramid level, coarsest first: the finest level gets
/// 2^{n_P + 1}, each coarser one half as many, never fewer than 2^4.
std::vector<int> level_iterations(int levels, int n_p);

/// Registers the region indicator (moving) onto the support indicator (fixed)
/// on a canvas in kernel coordinates, after the affine initializer. The
/// (smoothing, depth) pair with the smallest sample mismatch wins. Regions
/// touching the grid border get the affine margin map instead.
Diffeomorphism estimate_diffeomorphism_demons(const RegionMask& region, const KernelSupport& support,
                                              const MappingFitParams& params = {});

}  // namespace ewt

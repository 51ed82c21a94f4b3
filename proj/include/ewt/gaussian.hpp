#pragma once

#include <vector>

#include "ewt/spectral.hpp"

namespace ewt {

enum class Boundary { Periodic, Clamp };

/// Normalized 1D Gaussian taps with radius ceil(truncate * sigma); sigma <= 0
/// yields the single tap {1}.
std::vector<double> gaussian_taps(double sigma, double truncate = 4.0);

/// Separable Gaussian smoothing. Summation order is fixed per output sample.
RealImage gaussian_smooth(const RealImage& img, double sigma, Boundary boundary, double truncate = 4.0);

}  // namespace ewt

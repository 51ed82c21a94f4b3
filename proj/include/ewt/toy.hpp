#pragma once

#include <cstdint>
#include <vector>

#include "ewt/spectral.hpp"

namespace ewt {

struct PlantedWave {
  int di = 0;  ///< integer frequency offset (cycles per image width)
  int dj = 0;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct ToyImage {
  RealImage image;
  std::vector<PlantedWave> waves;
};

/// Windowed plane waves at well-separated integer frequencies over a smooth
/// background, plus optional white noise. Deterministic per seed on every
/// platform (the generator's raw output is mapped by hand).
ToyImage make_toy_image(int width, int height, int num_waves, std::uint64_t seed, double noise_sigma = 0.0);

}  // namespace ewt

#include "ewt/toy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ewt {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double normal() {
    double u1 = (*this)();
    while (u1 <= 0.0) u1 = (*this)();
    const double u2 = (*this)();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

ToyImage make_toy_image(int width, int height, int num_waves, std::uint64_t seed, double noise_sigma) {
  if (num_waves < 1) throw ValidationError("toy image needs at least one wave");
  if (width < 16 || height < 1 || (height > 1 && height < 16))
    throw ValidationError("toy image must be at least 16 samples per axis");
  if (!(noise_sigma >= 0)) throw ValidationError("noise sigma must be non-negative");

  const bool one_d = height == 1;
  const int span = one_d ? width : std::min(width, height);
  const double r_lo = span / 8.0, r_hi = 3.0 * span / 8.0;
  const double min_gap = span / 8.0;
  Uniform uni(seed);

  ToyImage toy;
  auto far_enough = [&](int di, int dj) {
    if (std::hypot(di, dj) < r_lo || std::hypot(di, dj) > r_hi) return false;
    for (const auto& w : toy.waves) {
      if (std::hypot(di - w.di, dj - w.dj) < min_gap) return false;
      if (std::hypot(di + w.di, dj + w.dj) < min_gap) return false;
    }
    // keep the mirror pair itself apart
    return std::hypot(2.0 * di, 2.0 * dj) >= min_gap;
  };
  int attempts = 0;
  while (static_cast<int>(toy.waves.size()) < num_waves) {
    if (++attempts > 100000) throw ValidationError("cannot place that many separated waves");
    const double r = r_lo + (r_hi - r_lo) * uni();
    const double theta = std::numbers::pi * uni();
    const int di = static_cast<int>(std::lround(r * std::cos(theta)));
    const int dj = one_d ? 0 : static_cast<int>(std::lround(r * std::sin(theta)));
    if (one_d && di <= 0) continue;
    if (!far_enough(di, dj)) continue;
    toy.waves.push_back({di, dj, 1.0 + 0.5 * uni(), two_pi * uni()});
  }

  toy.image = RealImage(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) / width;
      const double fy = one_d ? 0.0 : static_cast<double>(y) / height;
      const double window = (0.75 + 0.25 * std::cos(two_pi * fx)) * (one_d ? 1.0 : 0.75 + 0.25 * std::cos(two_pi * fy));
      double v = 2.0 + 0.5 * std::cos(two_pi * fx) + (one_d ? 0.0 : 0.3 * std::sin(two_pi * fy));
      for (const auto& w : toy.waves)
        v += window * w.amplitude * std::cos(two_pi * (w.di * fx + w.dj * fy) + w.phase);
      toy.image(x, y) = v;
    }
  if (noise_sigma > 0)
    for (double& v : toy.image.data) v += noise_sigma * uni.normal();
  return toy;
}

}  // namespace ewt

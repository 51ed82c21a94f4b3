#include "ewt/gaussian.hpp"

#include <cmath>

namespace ewt {

std::vector<double> gaussian_taps(double sigma, double truncate) {
  if (!(sigma > 0.0)) return {1.0};
  const int radius = std::max(1, static_cast<int>(std::ceil(truncate * sigma)));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * (k * k) / (sigma * sigma));
    taps[k + radius] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

namespace {

inline int resolve(int k, int n, Boundary b) {
  if (b == Boundary::Periodic) {
    k %= n;
    return k < 0 ? k + n : k;
  }
  return k < 0 ? 0 : (k >= n ? n - 1 : k);
}

}  // namespace

RealImage gaussian_smooth(const RealImage& img, double sigma, Boundary boundary, double truncate) {
  const auto taps = gaussian_taps(sigma, truncate);
  if (taps.size() == 1) return img;
  const int r = static_cast<int>(taps.size() / 2);
  const int w = img.width, h = img.height;
  RealImage tmp(w, h), out(w, h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * img(resolve(i + k, w, boundary), j);
      tmp(i, j) = acc;
    }
  }
  if (h == 1) return tmp;
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * tmp(i, resolve(j + k, h, boundary));
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace ewt

#include "ewt/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

namespace ewt {

FrequencyGrid::FrequencyGrid(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw ValidationError("frequency grid dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
}

std::optional<std::pair<int, int>> FrequencyGrid::index_of_offset(int di, int dj) const {
  const int i = di + width_ / 2;
  const int j = dj + height_ / 2;
  if (i < 0 || i >= width_ || j < 0 || j >= height_) return std::nullopt;
  return std::pair{i, j};
}

std::optional<std::pair<int, int>> FrequencyGrid::mirror(int i, int j) const {
  return index_of_offset(-offset_i(i), -offset_j(j));
}

bool FrequencyGrid::on_nyquist(int i, int j) const {
  return (width_ % 2 == 0 && i == 0) || (height_ % 2 == 0 && height_ > 1 && j == 0);
}

std::optional<std::pair<int, int>> FrequencyGrid::nearest(Vec2 xi) const {
  const int di = static_cast<int>(std::lround(xi.x * width_));
  const int dj = is_1d() ? 0 : static_cast<int>(std::lround(xi.y * height_));
  return index_of_offset(di, dj);
}

void require_finite(const RealImage& img, const char* what) {
  for (std::size_t k = 0; k < img.size(); ++k) {
    if (!std::isfinite(img.data[k])) {
      throw ValidationError(std::string(what) + ": non-finite value at sample " + std::to_string(k));
    }
  }
}

void require_finite(const ComplexField& field, const char* what) {
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (!std::isfinite(field.data[k].real()) || !std::isfinite(field.data[k].imag())) {
      throw ValidationError(std::string(what) + ": non-finite value at sample " + std::to_string(k));
    }
  }
}

namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
    if (!ptr) throw NumericalError("fftw allocation failed");
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

// The planner is not thread-safe; execution with the new-array interface is.
// Plans are made once per (shape, direction) on aligned scratch buffers and
// always executed on fftw-allocated (hence equally aligned) arrays so that the
// same codelets run every time.
class PlanCache {
 public:
  fftw_plan get(int width, int height, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::tuple{width, height, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    FftwBuffer in(static_cast<std::size_t>(width) * height);
    FftwBuffer out(static_cast<std::size_t>(width) * height);
    fftw_plan p = fftw_plan_dft_2d(height, width, in.ptr, out.ptr, sign, FFTW_ESTIMATE);
    if (!p) throw NumericalError("fftw planning failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

inline int wrap(int k, int n) {
  k %= n;
  return k < 0 ? k + n : k;
}

}  // namespace

ComplexField fft_forward(const ComplexField& spatial) {
  const int w = spatial.width, h = spatial.height;
  if (w < 1 || h < 1) throw ValidationError("fft_forward: empty field");
  const std::size_t n = spatial.size();
  FftwBuffer in(n), out(n);
  for (std::size_t k = 0; k < n; ++k) {
    in.ptr[k][0] = spatial.data[k].real();
    in.ptr[k][1] = spatial.data[k].imag();
  }
  fftw_execute_dft(plan_cache().get(w, h, FFTW_FORWARD), in.ptr, out.ptr);
  ComplexField result(w, h);
  const int ci = w / 2, cj = h / 2;
  for (int j = 0; j < h; ++j) {
    const int rj = wrap(j - cj, h);
    for (int i = 0; i < w; ++i) {
      const int ri = wrap(i - ci, w);
      const auto& v = out.ptr[static_cast<std::size_t>(rj) * w + ri];
      result(i, j) = Complex(v[0], v[1]);
    }
  }
  return result;
}

ComplexField fft_inverse(const ComplexField& centered) {
  const int w = centered.width, h = centered.height;
  if (w < 1 || h < 1) throw ValidationError("fft_inverse: empty field");
  const std::size_t n = centered.size();
  FftwBuffer in(n), out(n);
  const int ci = w / 2, cj = h / 2;
  for (int j = 0; j < h; ++j) {
    const int rj = wrap(j - cj, h);
    for (int i = 0; i < w; ++i) {
      const int ri = wrap(i - ci, w);
      const Complex v = centered(i, j);
      auto& dst = in.ptr[static_cast<std::size_t>(rj) * w + ri];
      dst[0] = v.real();
      dst[1] = v.imag();
    }
  }
  fftw_execute_dft(plan_cache().get(w, h, FFTW_BACKWARD), in.ptr, out.ptr);
  ComplexField result(w, h);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) result.data[k] = Complex(out.ptr[k][0] * scale, out.ptr[k][1] * scale);
  return result;
}

ComplexField to_complex(const RealImage& img) {
  ComplexField f(img.width, img.height);
  for (std::size_t k = 0; k < img.size(); ++k) f.data[k] = img.data[k];
  return f;
}

RealImage real_part(const ComplexField& field) {
  RealImage r(field.width, field.height);
  for (std::size_t k = 0; k < field.size(); ++k) r.data[k] = field.data[k].real();
  return r;
}

ComplexField dft2(const RealImage& img) {
  if (img.width < 2 || img.height < 2) {
    throw ValidationError("dft2: image must be at least 2x2, got " + std::to_string(img.width) + "x" +
                          std::to_string(img.height));
  }
  require_finite(img, "dft2");
  return fft_forward(to_complex(img));
}

ComplexField idft2(const ComplexField& centered) {
  require_finite(centered, "idft2");
  return fft_inverse(centered);
}

RealImage log_magnitude(const ComplexField& field) {
  RealImage r(field.width, field.height);
  for (std::size_t k = 0; k < field.size(); ++k) r.data[k] = std::log1p(std::abs(field.data[k]));
  return r;
}

double band_energy(const ComplexField& field, const SampleMask& mask) {
  if (!field.same_shape(mask)) throw ValidationError("band_energy: mask and field dimensions differ");
  double sum = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (mask.data[k]) sum += std::norm(field.data[k]);
  }
  return sum / static_cast<double>(field.size());
}

double spectral_energy(const ComplexField& field) {
  double sum = 0.0;
  for (const auto& v : field.data) sum += std::norm(v);
  return sum / static_cast<double>(field.size());
}

double mse(const RealImage& a, const RealImage& b) {
  if (!a.same_shape(b)) throw ValidationError("mse: image dimensions differ");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a.data[k] - b.data[k];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

}  // namespace ewt

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ewt/errors.hpp"
#include "ewt/geometry.hpp"

namespace ewt {

using Complex = std::complex<double>;

/// Dense row-major 2D sample array. Column index i runs along the width
/// (first frequency/space axis), row index j along the height.
template <typename T>
struct Field {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Field() = default;
  Field(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width) + static_cast<std::size_t>(i);
  }
  T& operator()(int i, int j) { return data[index(i, j)]; }
  const T& operator()(int i, int j) const { return data[index(i, j)]; }
  bool same_shape(int w, int h) const { return width == w && height == h; }
  template <typename U>
  bool same_shape(const Field<U>& o) const { return width == o.width && height == o.height; }
};

using RealImage = Field<double>;
using ComplexField = Field<Complex>;
using SampleMask = Field<std::uint8_t>;

/// Centered frequency grid. Sample (i, j) sits at
/// xi = ((i - W/2) / W, (j - H/2) / H) in cycles/sample, so xi = 0 is a grid
/// point and the Nyquist column/row (even sizes) lies on the negative side.
/// A height of 1 describes a 1D grid whose second coordinate is always 0.
class FrequencyGrid {
 public:
  FrequencyGrid(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  int center_i() const { return width_ / 2; }
  int center_j() const { return height_ / 2; }
  bool is_1d() const { return height_ == 1; }
  std::size_t size() const { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  /// Integer offset from the zero-frequency sample.
  int offset_i(int i) const { return i - width_ / 2; }
  int offset_j(int j) const { return j - height_ / 2; }
  Vec2 xi(int i, int j) const {
    return {static_cast<double>(offset_i(i)) / width_, static_cast<double>(offset_j(j)) / height_};
  }
  /// Inverse of offset_i/offset_j; nullopt when outside the grid.
  std::optional<std::pair<int, int>> index_of_offset(int di, int dj) const;
  /// Index of the sample at -xi, or nullopt for samples on a Nyquist line
  /// (no exact mirror on the grid).
  std::optional<std::pair<int, int>> mirror(int i, int j) const;
  bool on_nyquist(int i, int j) const;
  /// Nearest grid sample to an arbitrary xi (no wrapping); nullopt if outside.
  std::optional<std::pair<int, int>> nearest(Vec2 xi) const;

  /// Frequency spacing along each axis.
  double step_x() const { return 1.0 / width_; }
  double step_y() const { return 1.0 / height_; }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  int width_;
  int height_;
};

template <typename T>
FrequencyGrid grid_of(const Field<T>& f) {
  return FrequencyGrid(f.width, f.height);
}

/// Throws ValidationError when a value is NaN or infinite.
void require_finite(const RealImage& img, const char* what);
void require_finite(const ComplexField& field, const char* what);

/// Centered, unnormalized forward DFT of a real image (at least 2x2).
ComplexField dft2(const RealImage& img);
/// Inverse of dft2/fft_forward: takes a centered spectrum and returns the
/// spatial field (origin at index (0,0)), normalized by 1/(W*H).
ComplexField idft2(const ComplexField& centered);

/// Centered, unnormalized forward DFT of a complex spatial field. Accepts
/// 1D fields (height 1).
ComplexField fft_forward(const ComplexField& spatial);
/// Same as idft2 without the finiteness check.
ComplexField fft_inverse(const ComplexField& centered);

ComplexField to_complex(const RealImage& img);
RealImage real_part(const ComplexField& field);

/// log(1 + |F|) per sample.
RealImage log_magnitude(const ComplexField& field);

/// (1/(W*H)) * sum of |F|^2 over the masked samples.
double band_energy(const ComplexField& field, const SampleMask& mask);
/// (1/(W*H)) * sum of |F|^2 over the whole grid.
double spectral_energy(const ComplexField& field);

/// Mean squared error (1/(W*H)) * sum |a - b|^2.
double mse(const RealImage& a, const RealImage& b);

}  // namespace ewt

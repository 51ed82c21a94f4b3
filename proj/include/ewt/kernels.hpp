#pragma once

#include <functional>
#include <string>

#include "ewt/spectral.hpp"

namespace ewt {

enum class SupportShape { Disk, Square };

/// Canonical support Lambda of a kernel: a disk of given radius or a square of
/// given half side, centered at 0 (hence point-symmetric).
struct KernelSupport {
  SupportShape shape = SupportShape::Disk;
  double size = 0.5;

  static KernelSupport disk(double radius);
  static KernelSupport square(double half_side);

  /// Membership of the open set.
  bool contains(Vec2 u) const;
  /// Membership of the closure.
  bool contains_closed(Vec2 u) const;
  /// Distance from 0 to the boundary along direction theta.
  double boundary_radius(double theta) const;
  /// Half extents of the bounding box.
  Vec2 half_extent() const { return {size, size}; }

  friend bool operator==(const KernelSupport&, const KernelSupport&) = default;
};

/// sum_j a^{-1/2} psi1((x + j P) / a) exp(2 pi i eta (x + j P)) for one axis of
/// a separable kernel: the spatial filter of an axis-aligned affine warp,
/// periodized with period P.
using PeriodizedAxis = std::function<Complex(double x, double a, double eta, double period)>;

/// A wavelet kernel given by its Fourier transform on canonical coordinates.
struct WaveletKernel {
  std::string name;
  int dimension = 2;  ///< 1 for the 1D prototypes (only u.x is read)
  KernelSupport support;
  bool compactly_supported = false;
  double delta = 0.0;  ///< coverage deficit, filled at registration
  double peak = 1.0;   ///< max |psi_hat|
  std::function<Complex(Vec2)> fourier;
  /// Continuous spatial kernel psi = F^{-1}(psi_hat); may be empty.
  std::function<Complex(Vec2)> spatial;
  /// Exact periodized axis factor for separable kernels; may be empty.
  PeriodizedAxis periodized_axis;

  Complex operator()(Vec2 u) const { return fourier(u); }
};

double gabor1d_hat(double v);
Complex shannon1d_hat(double v);
/// exp(-pi (5/2)^2 |u|^2)
double gabor_hat(Vec2 u);
/// Separable product of the 1D Shannon transform, support [-1/2, 1/2)^2.
Complex shannon_hat(Vec2 u);

/// Spatial kernels (inverse Fourier transforms of the above).
double gabor1d_spatial(double x);
Complex shannon1d_spatial(double x);

/// Riemann-sum estimate of the deficit delta = 1 - mass(closure of Lambda) / mass.
/// The sum runs over `resolution` samples per axis of a box wide enough for
/// the kernel's tails.
double kernel_coverage(const WaveletKernel& kernel, int resolution);

/// Computes delta and rejects kernels with delta >= 1 - 1e-3.
WaveletKernel register_kernel(WaveletKernel kernel);

WaveletKernel make_gabor_kernel(int dimension = 2, double support_radius = 0.5);
WaveletKernel make_shannon_kernel(int dimension = 2);

/// "gabor" or "shannon".
WaveletKernel make_kernel(const std::string& name, int dimension = 2);

}  // namespace ewt

#include "ewt/kernels.hpp"

#include <cmath>
#include <numbers>

#include "ewt/errors.hpp"

namespace ewt {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double gabor_scale = 2.5;

double sinc(double t) {
  if (std::abs(t) < 1e-12) return 1.0;
  return std::sin(pi * t) / (pi * t);
}

double wrap_angle(double phi) {
  double p = std::fmod(phi, 2.0 * pi);
  if (p < 0) p += 2.0 * pi;
  return p;
}

// sum_j e^{i j phi} / (j + e) - 1/e for |e| <= 1/2 (symmetric summation),
// i.e. the lattice series with its singular term removed.
Complex lattice_regular(double phi, double e) {
  const double p = wrap_angle(phi);
  const bool zero_phase = p < 1e-13 || 2.0 * pi - p < 1e-13;
  if (std::abs(e) >= 1e-3) {
    const Complex full = zero_phase ? Complex(pi / std::tan(pi * e), 0.0)
                                    : pi * std::exp(Complex(0.0, (pi - p) * e)) / std::sin(pi * e);
    return full - 1.0 / e;
  }
  const double p2 = pi * pi, e2 = e * e;
  if (zero_phase) return {-p2 * e / 3.0 - p2 * p2 * e * e2 / 45.0, 0.0};
  const double b = pi - p;
  const Complex phase = std::exp(Complex(0.0, b * e));
  // (e^{i b e} - 1) / e, written without cancellation
  Complex lead = e == 0.0 ? Complex(0.0, b)
                          : Complex(-2.0 * std::pow(std::sin(0.5 * b * e), 2), std::sin(b * e)) / e;
  return lead + (p2 * e / 6.0 + 7.0 * p2 * p2 * e * e2 / 360.0) * phase;
}

Complex shannon_periodized(double x, double a, double eta, double period) {
  // t_j = s + j q; sum_j sinc(t_j) e^{i beta j} via two lattice series in c = s/q
  const double s = x / a - 0.5;
  const double q = period / a;
  const double c = s / q;
  const double beta = 2.0 * pi * eta * period;
  const double j0 = std::round(-c);
  const double e = c + j0;
  const double phi1 = pi * q + beta, phi2 = -pi * q + beta;
  const Complex regular = (std::exp(Complex(0.0, pi * s + j0 * phi1)) * lattice_regular(phi1, e) -
                           std::exp(Complex(0.0, -pi * s + j0 * phi2)) * lattice_regular(phi2, e)) /
                          (Complex(0.0, 2.0) * pi * q);
  const Complex near = sinc(s + j0 * q) * std::exp(Complex(0.0, beta * j0));
  return Complex(0.0, 1.0) * std::exp(Complex(0.0, 2.0 * pi * eta * x)) * (near + regular) / std::sqrt(std::abs(a));
}

Complex gabor_periodized(double x, double a, double eta, double period) {
  const int reach = static_cast<int>(std::ceil(4.0 * gabor_scale * std::abs(a) / period)) + 1;
  Complex acc = 0.0;
  for (int j = -reach; j <= reach; ++j) {
    const double y = x + j * period;
    acc += gabor1d_spatial(y / a) * std::exp(Complex(0.0, 2.0 * pi * eta * y));
  }
  return acc / std::sqrt(std::abs(a));
}

}  // namespace

KernelSupport KernelSupport::disk(double radius) {
  if (!(radius > 0)) throw ValidationError("support radius must be positive");
  return {SupportShape::Disk, radius};
}

KernelSupport KernelSupport::square(double half_side) {
  if (!(half_side > 0)) throw ValidationError("support half side must be positive");
  return {SupportShape::Square, half_side};
}

bool KernelSupport::contains(Vec2 u) const {
  if (shape == SupportShape::Disk) return u.squared_norm() < size * size;
  return std::abs(u.x) < size && std::abs(u.y) < size;
}

bool KernelSupport::contains_closed(Vec2 u) const {
  if (shape == SupportShape::Disk) return u.squared_norm() <= size * size;
  return std::abs(u.x) <= size && std::abs(u.y) <= size;
}

double KernelSupport::boundary_radius(double theta) const {
  if (shape == SupportShape::Disk) return size;
  const double c = std::abs(std::cos(theta));
  const double s = std::abs(std::sin(theta));
  return size / std::max(c, s);
}

double gabor1d_hat(double v) { return std::exp(-pi * gabor_scale * gabor_scale * v * v); }

Complex shannon1d_hat(double v) {
  if (v < -0.5 || v >= 0.5) return 0.0;
  return std::exp(Complex(0.0, -pi * (v + 1.5)));
}

double gabor_hat(Vec2 u) { return std::exp(-pi * gabor_scale * gabor_scale * u.squared_norm()); }

Complex shannon_hat(Vec2 u) { return shannon1d_hat(u.x) * shannon1d_hat(u.y); }

double gabor1d_spatial(double x) {
  return std::exp(-pi * x * x / (gabor_scale * gabor_scale)) / gabor_scale;
}

Complex shannon1d_spatial(double x) { return Complex(0.0, sinc(x - 0.5)); }

double kernel_coverage(const WaveletKernel& kernel, int resolution) {
  if (resolution < 8) throw ValidationError("coverage resolution too small");
  const double half = kernel.compactly_supported ? 1.05 * kernel.support.size
                                                 : kernel.support.size + 1.0;
  const double h = 2.0 * half / resolution;
  double inside = 0.0;
  double total = 0.0;
  const int rows = kernel.dimension == 1 ? 1 : resolution;
  for (int r = 0; r < rows; ++r) {
    const double v = kernel.dimension == 1 ? 0.0 : -half + (r + 0.5) * h;
    for (int k = 0; k < resolution; ++k) {
      const Vec2 u{-half + (k + 0.5) * h, v};
      const double m = std::norm(kernel.fourier(u));
      total += m;
      const bool in = kernel.dimension == 1 ? std::abs(u.x) <= kernel.support.boundary_radius(0.0)
                                            : kernel.support.contains_closed(u);
      if (in) inside += m;
    }
  }
  if (!(total > 0)) throw NumericalError("kernel " + kernel.name + " has no mass");
  return std::max(0.0, 1.0 - inside / total);
}

WaveletKernel register_kernel(WaveletKernel kernel) {
  if (!kernel.fourier) throw ValidationError("kernel " + kernel.name + " has no transform");
  if (kernel.dimension != 1 && kernel.dimension != 2)
    throw ValidationError("kernel dimension must be 1 or 2");
  kernel.delta = kernel_coverage(kernel, kernel.dimension == 1 ? 8192 : 512);
  if (kernel.delta >= 1.0 - 1e-3)
    throw ValidationError("kernel " + kernel.name + " carries no mass on its support");
  return kernel;
}

WaveletKernel make_gabor_kernel(int dimension, double support_radius) {
  WaveletKernel k;
  k.name = "gabor";
  k.dimension = dimension;
  k.support = KernelSupport::disk(support_radius);
  k.compactly_supported = false;
  if (dimension == 1) {
    k.fourier = [](Vec2 u) { return Complex(gabor1d_hat(u.x), 0.0); };
    k.spatial = [](Vec2 x) { return Complex(gabor1d_spatial(x.x), 0.0); };
  } else {
    k.fourier = [](Vec2 u) { return Complex(gabor_hat(u), 0.0); };
    k.spatial = [](Vec2 x) { return Complex(gabor1d_spatial(x.x) * gabor1d_spatial(x.y), 0.0); };
  }
  k.periodized_axis = gabor_periodized;
  return register_kernel(std::move(k));
}

WaveletKernel make_shannon_kernel(int dimension) {
  WaveletKernel k;
  k.name = "shannon";
  k.dimension = dimension;
  k.support = KernelSupport::square(0.5);
  k.compactly_supported = true;
  if (dimension == 1) {
    k.fourier = [](Vec2 u) { return shannon1d_hat(u.x); };
    k.spatial = [](Vec2 x) { return shannon1d_spatial(x.x); };
  } else {
    k.fourier = [](Vec2 u) { return shannon_hat(u); };
    k.spatial = [](Vec2 x) { return shannon1d_spatial(x.x) * shannon1d_spatial(x.y); };
  }
  k.periodized_axis = shannon_periodized;
  return register_kernel(std::move(k));
}

WaveletKernel make_kernel(const std::string& name, int dimension) {
  if (name == "gabor") return make_gabor_kernel(dimension);
  if (name == "shannon") return make_shannon_kernel(dimension);
  throw ValidationError("unknown kernel '" + name + "'");
}

}  // namespace ewt

#include <doctest.h>

#include <cmath>

#include "ewt/kernels.hpp"
#include "oracles.hpp"

using namespace ewt;

TEST_CASE("shannon 1D transform values and half-open support") {
  CHECK(std::abs(shannon1d_hat(0.0) - Complex(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(shannon1d_hat(-0.5)) == doctest::Approx(1.0));
  CHECK(std::abs(shannon1d_hat(0.5)) == 0.0);
  CHECK(std::abs(shannon1d_hat(0.51)) == 0.0);
  CHECK(std::abs(shannon_hat({0.0, 0.0}) - Complex(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("gabor transform at the support boundary") {
  CHECK(gabor_hat({0.0, 0.0}) == 1.0);
  CHECK(gabor_hat({0.5, 0.0}) == doctest::Approx(std::exp(-oracle::pi * 6.25 * 0.25)));
}

TEST_CASE("spatial kernels are inverse transforms (quadrature)") {
  // psi(x) = int psi_hat(v) e^{2 pi i v x} dv
  for (double x : {0.0, 0.3, -1.7, 2.5}) {
    const int n = 20000;
    Complex g = 0.0, s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double vg = -3.0 + (k + 0.5) * 6.0 / n;
      g += gabor1d_hat(vg) * std::exp(Complex(0.0, 2.0 * oracle::pi * vg * x)) * (6.0 / n);
      const double vs = -0.5 + (k + 0.5) / n;
      s += shannon1d_hat(vs) * std::exp(Complex(0.0, 2.0 * oracle::pi * vs * x)) / double(n);
    }
    CHECK(std::abs(g - gabor1d_spatial(x)) < 1e-9);
    CHECK(std::abs(s - shannon1d_spatial(x)) < 1e-7);
  }
}

TEST_CASE("coverage deficit") {
  auto sh = make_shannon_kernel();
  CHECK(sh.delta < 1e-12);
  auto ga = make_gabor_kernel();
  // radial integral of exp(-2 pi 6.25 r^2) outside r = 1/2
  const double exact = std::exp(-2.0 * oracle::pi * 6.25 * 0.25);
  CHECK(ga.delta == doctest::Approx(exact).epsilon(0.02));
  auto wide = make_gabor_kernel(2, 0.7);
  CHECK(wide.delta < ga.delta);
  auto one = make_gabor_kernel(1);
  CHECK(one.delta == doctest::Approx(std::erfc(std::sqrt(2.0 * oracle::pi) * 2.5 * 0.5)).epsilon(0.02));
  CHECK(make_shannon_kernel(1).delta < 1e-12);
}

TEST_CASE("registration rejects kernels with no mass on the support") {
  WaveletKernel k;
  k.name = "offset";
  k.support = KernelSupport::disk(0.1);
  k.fourier = [](Vec2 u) { return Complex(std::exp(-50.0 * (u - Vec2{0.9, 0.0}).squared_norm()), 0.0); };
  CHECK_THROWS_AS(register_kernel(k), ValidationError);
  CHECK_THROWS_AS(make_kernel("morlet"), ValidationError);
}

TEST_CASE("periodized axis factor matches a direct lattice sum") {
  // closed-form series against its truncated definition
  for (double phi : {0.7, 2.0, 5.5, -1.3})
    for (double c : {0.25, -0.4, 1.6}) {
      Complex closed = 0.0;
      double p = std::fmod(phi, 2 * oracle::pi);
      if (p < 0) p += 2 * oracle::pi;
      closed = oracle::pi * std::exp(Complex(0.0, (oracle::pi - p) * c)) / std::sin(oracle::pi * c);
      CHECK(std::abs(oracle::lattice_partial_sum(phi, c, 400000) - closed) < 1e-4);
    }

  auto sh = make_shannon_kernel();
  auto ga = make_gabor_kernel();
  const double period = 32.0;
  for (double a : {1.0, 3.5, 9.0})
    for (double eta : {0.0, 0.13, -0.3})
      for (double x : {0.0, 1.0, 7.0, 20.0}) {
        Complex direct_s = 0.0, direct_g = 0.0;
        for (int j = -200000; j <= 200000; ++j) {
          const double y = x + j * period;
          const Complex ph = std::exp(Complex(0.0, 2.0 * oracle::pi * eta * y));
          direct_s += shannon1d_spatial(y / a) * ph;
          if (std::abs(j) < 20) direct_g += gabor1d_spatial(y / a) * ph;
        }
        direct_s /= std::sqrt(a);
        direct_g /= std::sqrt(a);
        CHECK(std::abs(sh.periodized_axis(x, a, eta, period) - direct_s) < 2e-5);
        CHECK(std::abs(ga.periodized_axis(x, a, eta, period) - direct_g) < 1e-12);
      }
}

TEST_CASE("shannon periodized factor equals the finite Poisson sum") {
  // sum_j g(x + jP) = (1/P) sum_k g_hat(k/P) e^{2 pi i k x / P} for band-limited g
  auto sh = make_shannon_kernel();
  for (int period : {16, 128, 256})
    for (double a : {1.3, 4.1, 10.2})
      for (double eta : {0.0, 0.1234, -0.31})
        for (int x : {0, 1, 2, 5, period / 2, period - 1}) {
          Complex poisson = 0.0;
          for (int k = -period; k <= period; ++k) {
            const double xi = static_cast<double>(k) / period;
            poisson += std::sqrt(a) * shannon1d_hat(a * (xi - eta)) *
                       std::exp(Complex(0.0, 2.0 * oracle::pi * xi * x));
          }
          poisson /= period;
          CHECK(std::abs(sh.periodized_axis(x, a, eta, period) - poisson) < 1e-12);
        }
  // a sample exactly on the sinc peak
  Complex poisson = 0.0;
  for (int k = -32; k < 32; ++k)
    poisson += std::sqrt(2.0) * shannon1d_hat(2.0 * (k / 32.0 - 0.1)) * std::exp(Complex(0.0, 2.0 * oracle::pi * k / 32.0));
  CHECK(std::abs(sh.periodized_axis(1.0, 2.0, 0.1, 32.0) - poisson / 32.0) < 1e-12);
}

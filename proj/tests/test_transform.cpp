#include <doctest.h>

#include <cmath>
#include <random>

#include "ewt/transform.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ewt;

namespace {

FilterBank all_ones(int w, int h) {
  EmpiricalFilter f{0, ComplexField(w, h, 1.0), "identity", [](Vec2) { return Complex(1.0); }};
  return make_bank({f});
}

double total_energy(const CoefficientSet& c) {
  double e = 0;
  for (const auto& b : c.bands)
    for (auto v : b.data) e += std::norm(v);
  return e;
}

// sum_x f(x) conj(psi(x - b)) with psi periodic on the grid
Complex inner_product(const RealImage& f, const ComplexField& psi, int bx, int by) {
  Complex acc = 0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const int sx = ((x - bx) % f.width + f.width) % f.width;
      const int sy = ((y - by) % f.height + f.height) % f.height;
      acc += f(x, y) * std::conj(psi(sx, sy));
    }
  return acc;
}

}  // namespace

TEST_CASE("all-ones filter is the identity") {
  auto f = oracle::random_image(24, 20, 3);
  auto bank = all_ones(24, 20);
  auto c = forward(f, bank);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::abs(c.bands[0].data[k] - f.data[k]) < 1e-12);
  auto r = reconstruct(c, dual_bank(bank));
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::abs(r.image.data[k] - f.data[k]) < 1e-12);
  CHECK_THROWS_AS(forward(oracle::random_image(8, 8, 1), bank), ValidationError);
}

TEST_CASE("forward matches direct inner products") {
  FrequencyGrid g(16, 16);
  auto bank = fixture::gabor_lattice_bank(g);
  auto f = oracle::random_image(16, 16, 11);
  auto c = forward(f, bank);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, 15);
  for (std::size_t n = 0; n < bank.size(); ++n) {
    // spatial filter from an independent O(N^2) inverse DFT
    ComplexField psi(16, 16);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        Complex acc = 0;
        for (int j = 0; j < 16; ++j)
          for (int i = 0; i < 16; ++i) {
            const Vec2 xi = g.xi(i, j);
            acc += bank.filters[n](i, j) * std::exp(Complex(0, 2 * oracle::pi * (xi.x * x + xi.y * y)));
          }
        psi(x, y) = acc / 256.0;
      }
    for (int t = 0; t < 10; ++t) {
      const int bx = pick(rng), by = pick(rng);
      CHECK(std::abs(c.bands[n](bx, by) - inner_product(f, psi, bx, by)) <= 1e-10);
    }
  }
}

TEST_CASE("plane wave lands in one shannon band") {
  FrequencyGrid g(32, 32);
  auto bank = fixture::shannon_box_bank(g, 4);
  RealImage f(32, 32);
  ComplexField wave(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) wave(x, y) = std::exp(Complex(0, 2 * oracle::pi * (5.0 * x + 3.0 * y) / 32.0));
  auto c = forward_spectrum(fft_forward(wave), bank);
  // offsets (5, 3) sit in box (16 + 5) / 8 = 2, (16 + 3) / 8 = 2
  const int owner = 2 * 4 + 2;
  for (std::size_t n = 0; n < bank.size(); ++n) {
    double e = 0;
    for (auto v : c.bands[n].data) e += std::norm(v);
    if (bank.indices[n] == owner) {
      CHECK(e == doctest::Approx(1024.0).epsilon(1e-12));
      auto s = wavelet_spectrum(c, owner);
      for (double v : s.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    } else {
      CHECK(e < 1e-24);
    }
  }
}

TEST_CASE("exact reconstruction and tight shortcut") {
  FrequencyGrid g(64, 64);
  auto f = oracle::random_image(64, 64, 21);

  auto gabor = fixture::gabor_lattice_bank(g);
  auto duals = dual_bank(gabor);
  CHECK(duals.zero_count == 0);
  auto r = reconstruct(forward(f, gabor), duals);
  CHECK(mse(r.image, f) <= 1e-20);

  auto shannon = fixture::shannon_box_bank(g, 4);
  auto report = frame_bounds(shannon);
  CHECK(report.tight);
  CHECK(std::abs(report.A - 1.0) <= 1e-12);
  auto c = forward(f, shannon);
  const double via_dual = mse(reconstruct(c, dual_bank(shannon)).image, f);
  const double via_tight = mse(reconstruct(c, tight_dual(shannon, report.A)).image, f);
  CHECK(via_dual <= 1e-20);
  CHECK(std::abs(via_dual - via_tight) <= 1e-18);
}

TEST_CASE("forward is linear") {
  FrequencyGrid g(32, 32);
  auto bank = fixture::gabor_lattice_bank(g);
  auto f = oracle::random_image(32, 32, 1), h = oracle::random_image(32, 32, 2);
  RealImage mix(32, 32);
  for (std::size_t k = 0; k < mix.size(); ++k) mix.data[k] = 2.5 * f.data[k] + h.data[k];
  auto a = forward(f, bank), b = forward(h, bank), m = forward(mix, bank);
  double worst = 0;
  for (std::size_t n = 0; n < bank.size(); ++n)
    for (std::size_t k = 0; k < mix.size(); ++k)
      worst = std::max(worst, std::abs(m.bands[n].data[k] - 2.5 * a.bands[n].data[k] - b.bands[n].data[k]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("symmetric gabor coefficients are real") {
  // odd size: every sample has its mirror on the grid
  FrequencyGrid g(33, 33);
  auto sym = build_symmetric_bank(fixture::gabor_lattice_bank(g));
  auto c = forward(oracle::random_image(33, 33, 4), sym);
  for (const auto& band : c.bands) {
    double im = 0, norm = 0;
    for (auto v : band.data) {
      im = std::max(im, std::abs(v.imag()));
      norm += std::norm(v);
    }
    CHECK(im <= 1e-9 * std::sqrt(norm));
  }
  auto report = frame_bounds(sym);
  REQUIRE(report.cross_energy.has_value());
  CHECK(*report.cross_energy > 0.0);
  CHECK(mse(reconstruct(c, dual_bank(sym)).image, oracle::random_image(33, 33, 4)) <= 1e-20);
}

TEST_CASE("lineage mismatch is rejected") {
  FrequencyGrid g(16, 16);
  auto a = fixture::gabor_lattice_bank(g), b = fixture::gabor_lattice_bank(g);
  auto c = forward(oracle::random_image(16, 16, 1), a);
  CHECK_THROWS_AS(reconstruct(c, dual_bank(b)), ValidationError);
}

TEST_CASE("punctured bank loses exactly the energy on the gap") {
  FrequencyGrid g(32, 32);
  auto full = fixture::shannon_box_bank(g, 4);
  // a point-symmetric hole keeps the lost part of the spectrum hermitian
  auto in_hole = [&](int i, int j) {
    const int a = std::abs(g.offset_i(i)), b = std::abs(g.offset_j(j));
    const bool same_sign = (g.offset_i(i) > 0) == (g.offset_j(j) > 0);
    return a >= 2 && a <= 5 && b >= 1 && b <= 4 && same_sign;
  };
  std::vector<EmpiricalFilter> kept;
  for (std::size_t n = 0; n < full.size(); ++n) {
    ComplexField f = full.filters[n];
    for (int j = 0; j < 32; ++j)
      for (int i = 0; i < 32; ++i)
        if (in_hole(i, j)) f(i, j) = 0.0;
    kept.push_back({full.indices[n], f, "affine", {}});
  }
  auto bank = make_bank(kept);
  auto d = dual_bank(bank);
  CHECK(d.zero_count == 32);
  auto f = oracle::random_image(32, 32, 8);
  auto r = reconstruct(forward(f, bank), d);
  const double lost = band_energy(fft_forward(to_complex(f)), d.zero_coverage) / (32.0 * 32.0);
  CHECK(mse(r.image, f) == doctest::Approx(lost).epsilon(1e-9));
  auto report = frame_bounds(bank);
  CHECK(report.A == 0.0);
  CHECK_FALSE(report.tight);
  CHECK_THROWS_AS(dual_bank(bank, -1.0), ValidationError);
}

TEST_CASE("parseval check on a shannon full cover") {
  FrequencyGrid g(32, 32);
  auto bank = fixture::shannon_box_bank(g, 4);
  bool approx = true;
  auto table = discrete_parseval_check(bank, 1.0, 3, &approx);
  CHECK_FALSE(approx);
  CHECK(table.size() == 49);
  for (const auto& row : table) CHECK(row.residual <= 1e-12);

  std::vector<EmpiricalFilter> doubled;
  for (std::size_t n = 0; n < bank.size(); ++n) {
    ComplexField f = bank.filters[n];
    for (auto& v : f.data) v *= 2.0;
    doubled.push_back({bank.indices[n], f, "affine", {}});
  }
  auto scaled = make_bank(doubled);
  scaled.compact = true;
  for (const auto& row : discrete_parseval_check(scaled, 1.0, 1)) {
    if (row.alpha.x == 0 && row.alpha.y == 0)
      CHECK(row.residual == doctest::Approx(3.0).epsilon(1e-12));
    else
      CHECK(row.residual == 0.0);
  }

  auto bounds = discrete_frame_bounds(bank, 1.0, 3);
  CHECK(std::abs(bounds.A - 1.0) <= 1e-12);
  CHECK(std::abs(bounds.B - 1.0) <= 1e-12);
  CHECK(bounds.tail <= 1e-12);
}

TEST_CASE("gabor discrete bounds and band deletion") {
  FrequencyGrid g(32, 32);
  auto bank = fixture::gabor_lattice_bank(g);
  std::vector<std::string> warnings;
  bool approx = false;
  discrete_parseval_check(bank, 1.0, 1, &approx, &warnings);
  CHECK(approx);
  CHECK_FALSE(warnings.empty());

  auto full = discrete_frame_bounds(bank, 1.0, 2);
  CHECK(full.A > 0.0);
  CHECK(full.A <= full.B);
  // dropping filters removes non-negative terms from the diagonal sum
  std::vector<EmpiricalFilter> half;
  for (std::size_t n = 0; n < bank.size(); ++n)
    if (bank.indices[n] >= 0) half.push_back({bank.indices[n], bank.filters[n], "affine", bank.evaluators[n]});
  auto fewer = discrete_frame_bounds(make_bank(half), 1.0, 2);
  CHECK(fewer.A <= full.A);
}

TEST_CASE("wavelet spectrum bookkeeping") {
  FrequencyGrid g(16, 16);
  auto bank = fixture::gabor_lattice_bank(g);
  auto zero = forward(RealImage(16, 16, 0.0), bank);
  for (double v : wavelet_spectrum(zero, 1).data) CHECK(v == 0.0);
  auto c = forward(oracle::random_image(16, 16, 6), bank);
  double sum = 0;
  for (int n : c.indices)
    for (double v : wavelet_spectrum(c, n).data) sum += v;
  CHECK(sum == doctest::Approx(total_energy(c)).epsilon(1e-12));
  CHECK_THROWS_AS(wavelet_spectrum(c, 99), ValidationError);
  auto j = frame_report_to_json(frame_bounds(bank));
  CHECK(j.contains("A"));
  CHECK(j["parseval_residuals"].is_array());
}

#include "ewt/filterbank.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace ewt {

namespace {

constexpr double pi = std::numbers::pi;
std::atomic<std::uint64_t> next_lineage{1};

Complex evaluate(const WaveletKernel& k, Vec2 u, bool one_d) { return k.fourier(one_d ? Vec2{u.x, 0.0} : u); }

}  // namespace

std::size_t FilterBank::position(int n) const {
  for (std::size_t k = 0; k < indices.size(); ++k)
    if (indices[k] == n) return k;
  throw ValidationError("filter bank has no index " + std::to_string(n));
}

void FilterBank::compute_denominator() {
  denominator = RealImage(width, height, 0.0);
  for (const auto& f : filters)
    for (std::size_t k = 0; k < f.size(); ++k) denominator.data[k] += std::norm(f.data[k]);
}

EmpiricalFilter build_filter(const WaveletKernel& kernel, const Diffeomorphism& map, const FrequencyGrid& grid, int n,
                             FilterNormalization norm) {
  if ((kernel.dimension == 1) != grid.is_1d())
    throw ValidationError("kernel dimension does not match the grid");
  EmpiricalFilter f{n, ComplexField(grid.width(), grid.height()), map.kind(), {}};
  const bool dense = map.as_dense() != nullptr;
  const bool one_d = grid.is_1d();
  const Vec2 h{grid.step_x(), grid.step_y()};
  const double cutoff = 1e-14 * kernel.peak;
  auto value = [kernel, map, dense, one_d, h, cutoff, norm](Vec2 xi) -> Complex {
    const Complex v = evaluate(kernel, map(xi), one_d);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError("kernel " + kernel.name + " returned a non-finite value");
    if (dense && std::abs(v) < cutoff) return 0.0;
    if (norm == FilterNormalization::Unit) return v;
    double d = map.jacobian_det(xi, h);
    if (!(d >= jacobian_floor)) d = jacobian_floor;
    return std::sqrt(d) * v;
  };
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i) f.samples(i, j) = value(grid.xi(i, j));
  f.evaluate = value;
  return f;
}

FilterBank make_bank(std::vector<EmpiricalFilter> filters, BankKind kind) {
  if (filters.empty()) throw ValidationError("empty filter bank");
  FilterBank bank;
  bank.kind = kind;
  bank.width = filters.front().samples.width;
  bank.height = filters.front().samples.height;
  const bool all_eval = std::all_of(filters.begin(), filters.end(), [](const EmpiricalFilter& f) { return bool(f.evaluate); });
  for (auto& f : filters) {
    if (!f.samples.same_shape(bank.width, bank.height)) throw ValidationError("filters differ in size");
    for (int idx : bank.indices)
      if (idx == f.index) throw ValidationError("duplicate filter index " + std::to_string(f.index));
    bank.indices.push_back(f.index);
    bank.filters.push_back(std::move(f.samples));
    if (all_eval) bank.evaluators.push_back(std::move(f.evaluate));
  }
  bank.lineage = next_lineage++;
  bank.compute_denominator();
  return bank;
}

FilterBank build_symmetric_bank(const FilterBank& plain) {
  if (plain.kind != BankKind::Plain) throw ValidationError("symmetric banks are built from plain banks");
  std::vector<EmpiricalFilter> out;
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<int> positive;
  for (int n : plain.indices) {
    if (n < 0) {
      plain.position(-n);  // every mirror must have its partner
      continue;
    }
    positive.push_back(n);
  }
  std::sort(positive.begin(), positive.end());
  for (int n : positive) {
    if (n == 0) {
      FilterEvaluator e;
      if (plain.has_evaluators()) e = plain.evaluators[plain.position(0)];
      out.push_back({0, plain.filter(0), "symmetric", e});
      continue;
    }
    const ComplexField& a = plain.filter(n);
    const ComplexField& b = plain.filter(-n);
    ComplexField chi(plain.width, plain.height);
    for (std::size_t k = 0; k < chi.size(); ++k) chi.data[k] = r * (a.data[k] + b.data[k]);
    FilterEvaluator e;
    if (plain.has_evaluators())
      e = [ea = plain.evaluators[plain.position(n)], eb = plain.evaluators[plain.position(-n)], r](Vec2 xi) {
        return r * (ea(xi) + eb(xi));
      };
    out.push_back({n, std::move(chi), "symmetric", e});
  }
  FilterBank bank = make_bank(std::move(out), BankKind::Symmetric);
  bank.kernel = plain.kernel;
  bank.mapper = plain.mapper;
  bank.partition_hash = plain.partition_hash;
  bank.compact = plain.compact;
  bank.plain = std::make_shared<const FilterBank>(plain);
  return bank;
}

ComplexField spatial_filter_affine(const WaveletKernel& kernel, const Mat2& A, Vec2 eta, const FrequencyGrid& grid,
                                   int image_radius) {
  const double det = A.det();
  if (!(std::abs(det) > 0) || !std::isfinite(det)) throw ValidationError("singular affine map");
  if ((kernel.dimension == 1) != grid.is_1d()) throw ValidationError("kernel dimension does not match the grid");
  const int w = grid.width(), h = grid.height();
  ComplexField out(w, h);

  if (A.is_diagonal() && kernel.periodized_axis) {
    std::vector<Complex> fx(static_cast<std::size_t>(w)), fy(static_cast<std::size_t>(h), 1.0);
    for (int x = 0; x < w; ++x) fx[static_cast<std::size_t>(x)] = kernel.periodized_axis(x, A.a00, eta.x, w);
    if (!grid.is_1d())
      for (int y = 0; y < h; ++y) fy[static_cast<std::size_t>(y)] = kernel.periodized_axis(y, A.a11, eta.y, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out(x, y) = fx[static_cast<std::size_t>(x)] * fy[static_cast<std::size_t>(y)];
    return out;
  }

  if (!kernel.spatial) throw ValidationError("kernel " + kernel.name + " has no spatial form");
  const Mat2 inv_t = A.inverse().transposed();
  const double norm = 1.0 / std::sqrt(std::abs(grid.is_1d() ? A.a00 : det));
  const int ry = grid.is_1d() ? 0 : image_radius;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Complex acc = 0.0;
      for (int l = -ry; l <= ry; ++l)
        for (int m = -image_radius; m <= image_radius; ++m) {
          const Vec2 p{static_cast<double>(x + m * w), static_cast<double>(y + l * h)};
          const Vec2 q = grid.is_1d() ? Vec2{p.x / A.a00, 0.0} : inv_t * p;
          acc += kernel.spatial(q) * std::exp(Complex(0.0, 2.0 * pi * dot(eta, grid.is_1d() ? Vec2{p.x, 0.0} : p)));
        }
      out(x, y) = norm * acc;
    }
  return out;
}

FilterBank dyadic_bank_2d(int levels, double omega0, const WaveletKernel& kernel1d, const FrequencyGrid& grid) {
  if (levels < 1) throw ValidationError("dyadic bank needs at least one level");
  if (kernel1d.dimension != 1) throw ValidationError("dyadic bank needs a 1D kernel");
  if (grid.is_1d()) throw ValidationError("dyadic bank needs a 2D grid");
  const Vec2 centres[3] = {{omega0, 0.0}, {0.0, omega0}, {omega0, omega0}};
  std::vector<EmpiricalFilter> filters;
  for (int j = 0; j < levels; ++j) {
    const double s = std::ldexp(1.0, j);
    for (int n = 1; n <= 3; ++n) {
      const Vec2 c = centres[n - 1];
      auto value = [kernel1d, s, c](Vec2 xi) {
        return s * kernel1d.fourier({s * (xi.x - c.x), 0.0}) * kernel1d.fourier({s * (xi.y - c.y), 0.0});
      };
      EmpiricalFilter f{3 * j + n, ComplexField(grid.width(), grid.height()), "affine", value};
      for (int y = 0; y < grid.height(); ++y)
        for (int x = 0; x < grid.width(); ++x) f.samples(x, y) = value(grid.xi(x, y));
      filters.push_back(std::move(f));
    }
  }
  FilterBank bank = make_bank(std::move(filters));
  bank.kernel = kernel1d.name;
  bank.mapper = "dyadic";
  bank.compact = kernel1d.compactly_supported;
  return bank;
}

std::string partition_hash(const PartitionLabelMap& p) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint32_t>(p.width));
  mix(static_cast<std::uint32_t>(p.height));
  for (int l : p.labels.data) mix(static_cast<std::uint32_t>(l));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ewt

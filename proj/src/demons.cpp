#include "ewt/demons.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ewt/gaussian.hpp"

namespace ewt {

namespace {

double bilinear_clamped(const RealImage& img, double x, double y) {
  x = std::clamp(x, 0.0, img.width - 1.0);
  y = std::clamp(y, 0.0, img.height - 1.0);
  const int i0 = std::min(static_cast<int>(x), img.width - 2);
  const int j0 = std::min(static_cast<int>(y), img.height - 2);
  const double fx = x - i0, fy = y - j0;
  return (1 - fx) * (1 - fy) * img(i0, j0) + fx * (1 - fy) * img(i0 + 1, j0) + (1 - fx) * fy * img(i0, j0 + 1) +
         fx * fy * img(i0 + 1, j0 + 1);
}

RealImage downsample(const RealImage& img) {
  RealImage out(img.width / 2, img.height / 2);
  for (int j = 0; j < out.height; ++j)
    for (int i = 0; i < out.width; ++i)
      out(i, j) = 0.25 * (img(2 * i, 2 * j) + img(2 * i + 1, 2 * j) + img(2 * i, 2 * j + 1) + img(2 * i + 1, 2 * j + 1));
  return out;
}

// Doubles the resolution of a displacement component (in samples of its level).
RealImage upsample(const RealImage& img) {
  RealImage out(img.width * 2, img.height * 2);
  for (int j = 0; j < out.height; ++j)
    for (int i = 0; i < out.width; ++i)
      out(i, j) = 2.0 * bilinear_clamped(img, (i + 0.5) / 2.0 - 0.5, (j + 0.5) / 2.0 - 0.5);
  return out;
}

struct Field2 {
  RealImage x, y;
};

Field2 upsample_to(Field2 f, int size) {
  while (f.x.width < size) {
    f.x = upsample(f.x);
    f.y = upsample(f.y);
  }
  return f;
}

// s (canvas samples of the finest level) -> dense map, inverse by fixed point
DenseMap to_dense(const AffineMap& affine, const Field2& s, double half) {
  const int n = s.x.width;
  DenseMap m{affine, DisplacementCanvas(n, half), DisplacementCanvas(n, half)};
  const double h = m.to_region.spacing();
  for (std::size_t k = 0; k < s.x.size(); ++k) {
    m.to_region.dx.data[k] = s.x.data[k] * h;
    m.to_region.dy.data[k] = s.y.data[k] * h;
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 v = m.to_region.position(i, j);
      Vec2 d;
      for (int it = 0; it < 8; ++it) d = -m.to_region.sample(v + d);
      m.to_kernel.dx(i, j) = d.x;
      m.to_kernel.dy(i, j) = d.y;
    }
  return m;
}

struct Window {
  int i0, i1, j0, j1;
};

// grid samples whose affine image falls on the canvas
Window canvas_window(const FrequencyGrid& grid, const AffineMap& a, double half) {
  const Mat2 inv = a.A.inverse();
  Window w{grid.width(), -1, grid.height(), -1};
  for (Vec2 corner : {Vec2{-half, -half}, Vec2{half, -half}, Vec2{-half, half}, Vec2{half, half}}) {
    const Vec2 xi = a.eta + inv * corner;
    const int ci = static_cast<int>(std::floor(xi.x * grid.width())) + grid.center_i();
    const int cj = static_cast<int>(std::floor(xi.y * grid.height())) + grid.center_j();
    w.i0 = std::min(w.i0, ci - 1);
    w.i1 = std::max(w.i1, ci + 2);
    w.j0 = std::min(w.j0, cj - 1);
    w.j1 = std::max(w.j1, cj + 2);
  }
  w.i0 = std::max(w.i0, 0);
  w.j0 = std::max(w.j0, 0);
  w.i1 = std::min(w.i1, grid.width() - 1);
  w.j1 = std::min(w.j1, grid.height() - 1);
  return w;
}

std::size_t window_mismatch(const Diffeomorphism& map, const RegionMask& region, const KernelSupport& support,
                            const Window& w) {
  const FrequencyGrid grid = grid_of(region.mask);
  std::size_t count = 0;
  for (int j = w.j0; j <= w.j1; ++j)
    for (int i = w.i0; i <= w.i1; ++i)
      if ((region.mask(i, j) != 0) != support.contains(map(grid.xi(i, j)))) ++count;
  return count;
}

// max |T(gamma(xi)) - A(xi - eta)| over region samples, in grid samples
double inverse_residual(const Diffeomorphism& map, const RegionMask& region) {
  const FrequencyGrid grid = grid_of(region.mask);
  const DenseMap& dm = *map.as_dense();
  const AffineMap& a = dm.affine;
  double worst = 0.0;
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i) {
      if (!region.mask(i, j)) continue;
      const Vec2 xi = grid.xi(i, j);
      const Vec2 u = map(xi);
      const Vec2 e = u + dm.to_region.sample(u) - a.A * (xi - a.eta);
      worst = std::max({worst, std::abs(e.x) / a.A.a00 * grid.width(), std::abs(e.y) / a.A.a11 * grid.height()});
    }
  return worst;
}

struct RunResult {
  Field2 field;  // finest-level samples
  std::size_t risk;
  std::vector<std::string> warnings;
};

}  // namespace

void MappingFitParams::validate() const {
  if (smoothing.empty()) throw ValidationError("empty smoothing grid");
  for (double s : smoothing)
    if (!(s >= 0)) throw ValidationError("smoothing values must be non-negative");
  for (int l : levels)
    if (l < 1) throw ValidationError("pyramid depths must be positive");
  if (min_canvas < 8 || max_canvas < min_canvas) throw ValidationError("invalid canvas bounds");
  if (!(unbounded_margin > 0)) throw ValidationError("margin must be positive");
}

int pyramid_depth(int size) {
  int n = 0;
  while ((1LL << (n + 1)) < size) ++n;
  return n;
}

std::vector<int> level_iterations(int levels, int n_p) {
  std::vector<int> out;
  for (int k = 0; k < levels; ++k) out.push_back(1 << std::max(4, n_p + 1 - (levels - 1 - k)));
  return out;
}

Diffeomorphism estimate_diffeomorphism_demons(const RegionMask& region, const KernelSupport& support,
                                              const MappingFitParams& params) {
  params.validate();
  const FrequencyGrid grid = grid_of(region.mask);
  if (grid.is_1d()) throw ValidationError("demons estimation needs a 2D grid");
  if (!region.bounded) {
    Diffeomorphism m = affine_map_for_region(region, support, params.unbounded_margin);
    m.meta.estimator = "affine-margin";
    return m;
  }
  const Diffeomorphism init = affine_map_for_region(region, support);
  const AffineMap affine = *init.as_affine();
  const double half = 2.0 * support.size;

  // canvas resolution follows the region size in samples
  int lo_i = grid.width(), hi_i = -1, lo_j = grid.height(), hi_j = -1;
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i)
      if (region.mask(i, j)) {
        lo_i = std::min(lo_i, i);
        hi_i = std::max(hi_i, i);
        lo_j = std::min(lo_j, j);
        hi_j = std::max(hi_j, j);
      }
  const int extent = std::max(hi_i - lo_i + 1, hi_j - lo_j + 1);
  int size = params.min_canvas;
  while (size < 2 * extent && size < params.max_canvas) size *= 2;
  size = std::min(size, params.max_canvas);

  DisplacementCanvas probe(size, half);
  RealImage fixed(size, size), moving(size, size);
  const Mat2 inv = affine.A.inverse();
  // area fractions from 4x4 supersampling
  constexpr int sub = 4;
  const double h = probe.spacing();
  for (int j = 0; j < size; ++j)
    for (int i = 0; i < size; ++i) {
      const Vec2 c = probe.position(i, j);
      int in_f = 0, in_m = 0;
      for (int b = 0; b < sub; ++b)
        for (int a = 0; a < sub; ++a) {
          const Vec2 u = c + h * Vec2{(a + 0.5) / sub - 0.5, (b + 0.5) / sub - 0.5};
          in_f += support.contains(u);
          const auto idx = grid.nearest(affine.eta + inv * u);
          in_m += idx && region.mask(idx->first, idx->second);
        }
      fixed(i, j) = static_cast<double>(in_f) / (sub * sub);
      moving(i, j) = static_cast<double>(in_m) / (sub * sub);
    }
  fixed = gaussian_smooth(fixed, 1.0, Boundary::Clamp);
  moving = gaussian_smooth(moving, 1.0, Boundary::Clamp);

  const int n_p = pyramid_depth(size);
  std::vector<int> depths = params.levels;
  if (depths.empty())
    for (int d = n_p - 2; d <= n_p; ++d)
      if (d >= 1) depths.push_back(d);
  std::sort(depths.begin(), depths.end());

  const Window window = canvas_window(grid, affine, half);
  const std::size_t affine_risk = window_mismatch(init, region, support, window);
  // iterates whose inverse misses the round-trip contract are not eligible
  const std::size_t rejected = std::numeric_limits<std::size_t>::max();
  auto risk_of = [&](const Field2& f) {
    const Diffeomorphism m(to_dense(affine, f, half));
    if (inverse_residual(m, region) > 0.5) return rejected;
    return window_mismatch(m, region, support, window);
  };

  std::vector<RealImage> fixed_pyr{fixed}, moving_pyr{moving};
  while (static_cast<int>(fixed_pyr.size()) < std::max(1, *std::max_element(depths.begin(), depths.end()))) {
    if (fixed_pyr.back().width < 4) break;
    fixed_pyr.push_back(downsample(fixed_pyr.back()));
    moving_pyr.push_back(downsample(moving_pyr.back()));
  }

  RunResult best{{RealImage(size, size), RealImage(size, size)}, affine_risk, {}};
  double best_sigma = 0.0;
  int best_depth = 0;
  for (double sigma : params.smoothing)
    for (int depth : depths) {
      const int levels = std::min<int>(depth, static_cast<int>(fixed_pyr.size()));
      const auto iters = level_iterations(levels, n_p);
      RunResult run{{}, affine_risk, {}};
      std::size_t run_best = affine_risk;
      Field2 run_best_field{RealImage(size, size), RealImage(size, size)};
      Field2 s;
      std::size_t level_start_risk = affine_risk;
      for (int l = levels - 1; l >= 0; --l) {
        const RealImage& F = fixed_pyr[static_cast<std::size_t>(l)];
        const RealImage& M = moving_pyr[static_cast<std::size_t>(l)];
        const int n = F.width;
        if (s.x.width == 0) {
          s = {RealImage(n, n), RealImage(n, n)};
        } else {
          s = {upsample(s.x), upsample(s.y)};
        }
        RealImage gx(n, n), gy(n, n);
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            gx(i, j) = 0.5 * (F(std::min(i + 1, n - 1), j) - F(std::max(i - 1, 0), j));
            gy(i, j) = 0.5 * (F(i, std::min(j + 1, n - 1)) - F(i, std::max(j - 1, 0)));
          }
        for (int it = 0; it < iters[static_cast<std::size_t>(levels - 1 - l)]; ++it) {
          for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
              const double diff = bilinear_clamped(M, i + s.x(i, j), j + s.y(i, j)) - F(i, j);
              const double g2 = gx(i, j) * gx(i, j) + gy(i, j) * gy(i, j);
              const double den = g2 + diff * diff;
              if (den < 1e-12) continue;
              s.x(i, j) -= diff * gx(i, j) / den;
              s.y(i, j) -= diff * gy(i, j) / den;
            }
          s.x = gaussian_smooth(s.x, sigma, Boundary::Clamp);
          s.y = gaussian_smooth(s.y, sigma, Boundary::Clamp);
        }
        const Field2 fine = upsample_to(s, size);
        const std::size_t r = risk_of(fine);
        if (r == rejected) {
          std::ostringstream msg;
          msg << "sigma " << sigma << " depth " << depth << ": field not invertible at level " << l;
          run.warnings.push_back(msg.str());
        } else if (r > level_start_risk) {
          std::ostringstream msg;
          msg << "sigma " << sigma << " depth " << depth << ": mismatch rose from " << level_start_risk << " to " << r
              << " at level " << l;
          run.warnings.push_back(msg.str());
        }
        if (r != rejected) level_start_risk = r;
        if (r < run_best) {
          run_best = r;
          run_best_field = fine;
        }
      }
      if (run_best < best.risk) {
        best = {run_best_field, run_best, run.warnings};
        best_sigma = sigma;
        best_depth = depth;
      }
    }

  Diffeomorphism out(to_dense(affine, best.field, half));
  out.meta.estimator = "demons";
  out.meta.region = region.index;
  out.meta.residual = static_cast<double>(best.risk);
  out.meta.affine_residual = static_cast<double>(affine_risk);
  out.meta.sigma = best_sigma;
  out.meta.levels = best_depth;
  out.meta.warnings = best.warnings;
  if (best_depth == 0) out.meta.warnings.push_back("demons did not improve on the affine initializer");

  const double worst = inverse_residual(out, region);
  out.meta.inverse_residual = worst;
  if (worst > 0.5) out.meta.warnings.push_back("inverse field misses the 0.5 sample contract");
  return out;
}

}  // namespace ewt

#include "ewt/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ewt {

namespace {

constexpr double pi = std::numbers::pi;

double angle_of(Vec2 v) {
  double t = std::atan2(v.y, v.x);
  if (t < 0) t += 2.0 * pi;
  return t;
}

}  // namespace

DisplacementCanvas::DisplacementCanvas(int n, double half_width)
    : size(n), half(half_width), dx(n, n, 0.0), dy(n, n, 0.0) {
  if (n < 2 || !(half_width > 0)) throw ValidationError("invalid displacement canvas");
}

Vec2 DisplacementCanvas::sample(Vec2 u) const {
  const double h = spacing();
  const double gx = (u.x + half) / h - 0.5;
  const double gy = (u.y + half) / h - 0.5;
  if (gx <= -1.0 || gy <= -1.0 || gx >= size || gy >= size) return {};
  const int i0 = static_cast<int>(std::floor(gx));
  const int j0 = static_cast<int>(std::floor(gy));
  const double fx = gx - i0, fy = gy - j0;
  Vec2 acc;
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      const int i = i0 + a, j = j0 + b;
      if (i < 0 || j < 0 || i >= size || j >= size) continue;
      const double w = (a ? fx : 1.0 - fx) * (b ? fy : 1.0 - fy);
      acc = acc + w * Vec2{dx(i, j), dy(i, j)};
    }
  return acc;
}

DisplacementCanvas DisplacementCanvas::reflected() const {
  DisplacementCanvas out(size, half);
  for (int j = 0; j < size; ++j)
    for (int i = 0; i < size; ++i) {
      out.dx(i, j) = -dx(size - 1 - i, size - 1 - j);
      out.dy(i, j) = -dy(size - 1 - i, size - 1 - j);
    }
  return out;
}

double StarMap::scale(double theta) const {
  const auto& table = *region_radius;
  const double n = static_cast<double>(table.size());
  const double pos = theta / (2.0 * pi) * n;
  const double fl = std::floor(pos);
  const double f = pos - fl;
  const std::size_t k0 = static_cast<std::size_t>(static_cast<long long>(fl) % static_cast<long long>(table.size()));
  const std::size_t k1 = (k0 + 1) % table.size();
  const double rho = (1.0 - f) * table[k0] + f * table[k1];
  return support.boundary_radius(theta) / rho;
}

Diffeomorphism Diffeomorphism::affine(Mat2 A, Vec2 eta) {
  if (!(std::abs(A.det()) > 0) || !std::isfinite(A.det())) throw ValidationError("singular affine map");
  return Diffeomorphism(AffineMap{A, eta});
}

Vec2 Diffeomorphism::operator()(Vec2 xi) const {
  return std::visit(
      [&](const auto& m) -> Vec2 {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineMap>) {
          return m.A * (xi - m.eta);
        } else if constexpr (std::is_same_v<T, DenseMap>) {
          const Vec2 v = m.affine.A * (xi - m.affine.eta);
          return v + m.to_kernel.sample(v);
        } else {
          const Vec2 r = xi - m.center;
          if (r.x == 0.0 && r.y == 0.0) return {};
          return m.scale(angle_of(r)) * r;
        }
      },
      map_);
}

Vec2 Diffeomorphism::inverse(Vec2 u) const {
  return std::visit(
      [&](const auto& m) -> Vec2 {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineMap>) {
          return m.eta + m.A.inverse() * u;
        } else if constexpr (std::is_same_v<T, DenseMap>) {
          return m.affine.eta + m.affine.A.inverse() * (u + m.to_region.sample(u));
        } else {
          if (u.x == 0.0 && u.y == 0.0) return m.center;
          return m.center + (1.0 / m.scale(angle_of(u))) * u;
        }
      },
      map_);
}

Diffeomorphism Diffeomorphism::mirrored() const {
  Diffeomorphism out = std::visit(
      [&](const auto& m) -> Diffeomorphism {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineMap>) {
          return Diffeomorphism(AffineMap{m.A, -m.eta});
        } else if constexpr (std::is_same_v<T, DenseMap>) {
          return Diffeomorphism(DenseMap{{m.affine.A, -m.affine.eta}, m.to_region.reflected(), m.to_kernel.reflected()});
        } else {
          const auto& t = *m.region_radius;
          auto shifted = std::make_shared<std::vector<double>>(t.size());
          for (std::size_t k = 0; k < t.size(); ++k) (*shifted)[k] = t[(k + t.size() / 2) % t.size()];
          return Diffeomorphism(StarMap{-m.center, m.support, std::move(shifted)});
        }
      },
      map_);
  out.meta = meta;
  out.meta.region = -meta.region;
  return out;
}

double Diffeomorphism::jacobian_det(Vec2 xi, Vec2 h) const {
  if (const auto* a = as_affine()) return std::abs(a->A.det());
  if (const auto* s = as_star()) {
    const Vec2 r = xi - s->center;
    const double k = s->scale(r.x == 0.0 && r.y == 0.0 ? 0.0 : angle_of(r));
    return k * k;
  }
  const Vec2 gx = (*this)(xi + Vec2{h.x, 0.0}) - (*this)(xi - Vec2{h.x, 0.0});
  const Vec2 gy = (*this)(xi + Vec2{0.0, h.y}) - (*this)(xi - Vec2{0.0, h.y});
  return std::abs(gx.x * gy.y - gx.y * gy.x) / (4.0 * h.x * h.y);
}

std::string Diffeomorphism::kind() const {
  switch (map_.index()) {
    case 0:
      return "affine";
    case 1:
      return "dense";
    default:
      return "star";
  }
}

RealImage jacobian_det_field(const Diffeomorphism& map, const FrequencyGrid& grid, std::size_t* floored) {
  RealImage out(grid.width(), grid.height());
  const Vec2 h{grid.step_x(), grid.step_y()};
  std::size_t count = 0;
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i) {
      double d = map.jacobian_det(grid.xi(i, j), h);
      if (!(d >= jacobian_floor)) {
        d = jacobian_floor;
        ++count;
      }
      out(i, j) = d;
    }
  if (floored) *floored = count;
  return out;
}

namespace {

// Diagonal centroid-centred fit on integer sample offsets.
Diffeomorphism affine_fit(const std::vector<std::pair<int, int>>& offsets, bool bounded, const FrequencyGrid& grid,
                          const KernelSupport& support, double unbounded_margin, int index) {
  if (offsets.empty()) throw ValidationError("empty region");
  if (!(unbounded_margin > 0)) throw ValidationError("margin must be positive");
  double sx = 0.0, sy = 0.0;
  for (const auto& [di, dj] : offsets) {
    sx += static_cast<double>(di) / grid.width();
    sy += static_cast<double>(dj) / grid.height();
  }
  const Vec2 eta{sx / static_cast<double>(offsets.size()), sy / static_cast<double>(offsets.size())};
  double ex = 0.0, ey = 0.0;
  for (const auto& [di, dj] : offsets) {
    ex = std::max(ex, std::abs(static_cast<double>(di) / grid.width() - eta.x));
    ey = std::max(ey, std::abs(static_cast<double>(dj) / grid.height() - eta.y));
  }
  ex += 0.5 * grid.step_x();
  ey += 0.5 * grid.step_y();
  const double margin = bounded ? 1.0 : unbounded_margin;
  const Vec2 lam = support.half_extent();
  const double a00 = margin * lam.x / ex;
  const double a11 = grid.is_1d() ? 1.0 : margin * lam.y / ey;
  if (!std::isfinite(a00) || !std::isfinite(a11)) throw ValidationError("degenerate region extent");
  Diffeomorphism out = Diffeomorphism::affine(Mat2::diagonal(a00, a11), grid.is_1d() ? Vec2{eta.x, 0.0} : eta);
  out.meta.estimator = "affine";
  out.meta.region = index;
  return out;
}

std::vector<std::pair<int, int>> offsets_of(const RegionMask& region, const FrequencyGrid& grid) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i)
      if (region.mask(i, j)) out.emplace_back(grid.offset_i(i), grid.offset_j(j));
  return out;
}

}  // namespace

Diffeomorphism affine_map_for_region(const RegionMask& region, const KernelSupport& support, double unbounded_margin) {
  const FrequencyGrid grid = grid_of(region.mask);
  return affine_fit(offsets_of(region, grid), region.bounded, grid, support, unbounded_margin, region.index);
}

Diffeomorphism affine_map_for_pair(const RegionMask& region, const RegionMask& partner, const KernelSupport& support,
                                   double unbounded_margin) {
  const FrequencyGrid grid = grid_of(region.mask);
  if (!partner.mask.same_shape(region.mask)) throw ValidationError("region masks differ in size");
  auto pts = offsets_of(region, grid);
  for (const auto& [di, dj] : offsets_of(partner, grid)) pts.emplace_back(-di, -dj);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return affine_fit(pts, region.bounded && partner.bounded, grid, support, unbounded_margin, region.index);
}

Diffeomorphism star_shaped_map(const RegionMask& region, const KernelSupport& support, int angles) {
  const FrequencyGrid grid = grid_of(region.mask);
  if (grid.is_1d()) throw ValidationError("star-shaped maps need a 2D grid");
  if (!region.bounded) throw ValidationError("star-shaped map needs a bounded region");
  if (angles < 16 || angles % 2) throw ValidationError("angle table size must be even and at least 16");
  const Vec2 c = region.centroid;
  auto inside = [&](Vec2 p) {
    const auto idx = grid.nearest(p);
    return idx && region.mask(idx->first, idx->second);
  };
  if (!inside(c)) throw ValidationError("region " + std::to_string(region.index) + " does not contain its centroid; use the demons estimator");

  const double step = 0.25 * std::min(grid.step_x(), grid.step_y());
  const double gap = std::max(grid.step_x(), grid.step_y());
  auto table = std::make_shared<std::vector<double>>(static_cast<std::size_t>(angles));
  for (int k = 0; k < angles; ++k) {
    const double theta = 2.0 * pi * k / angles;
    const Vec2 dir{std::cos(theta), std::sin(theta)};
    double last_in = 0.0, exit_at = -1.0;
    for (double t = step; t < 1.5; t += step) {
      const Vec2 p = c + t * dir;
      if (std::abs(p.x) > 0.5 + grid.step_x() || std::abs(p.y) > 0.5 + grid.step_y()) break;
      if (inside(p)) {
        if (exit_at >= 0.0 && t - exit_at > gap)
          throw ValidationError("region " + std::to_string(region.index) + " is not star-shaped about its centroid; use the demons estimator");
        exit_at = -1.0;
        last_in = t;
      } else if (exit_at < 0.0) {
        exit_at = t;
      }
    }
    double lo = last_in, hi = last_in + step;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (inside(c + mid * dir) ? lo : hi) = mid;
    }
    (*table)[static_cast<std::size_t>(k)] = 0.5 * (lo + hi);
  }
  Diffeomorphism out(StarMap{c, support, std::move(table)});
  out.meta.estimator = "star";
  out.meta.region = region.index;
  return out;
}

std::size_t mapping_mismatch(const Diffeomorphism& map, const RegionMask& region, const KernelSupport& support) {
  const FrequencyGrid grid = grid_of(region.mask);
  std::size_t count = 0;
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i) {
      const bool in_region = region.mask(i, j) != 0;
      const Vec2 u = map(grid.xi(i, j));
      const bool in_support = grid.is_1d() ? std::abs(u.x) < support.size : support.contains(u);
      if (in_region != in_support) ++count;
    }
  return count;
}

nlohmann::json map_to_json(const Diffeomorphism& map) {
  nlohmann::json doc{{"kind", map.kind()},
                     {"region", map.meta.region},
                     {"estimator", map.meta.estimator},
                     {"residual", map.meta.residual},
                     {"affine_residual", map.meta.affine_residual},
                     {"inverse_residual", map.meta.inverse_residual},
                     {"warnings", map.meta.warnings}};
  const AffineMap* a = map.as_affine();
  if (const auto* d = map.as_dense()) {
    a = &d->affine;
    doc["canvas"] = {{"size", d->to_kernel.size}, {"half_width", d->to_kernel.half}};
    doc["params"] = {{"sigma", map.meta.sigma}, {"levels", map.meta.levels}};
  }
  if (a) {
    doc["A"] = {a->A.a00, a->A.a01, a->A.a10, a->A.a11};
    doc["eta"] = {a->eta.x, a->eta.y};
  }
  if (const auto* s = map.as_star()) {
    doc["center"] = {s->center.x, s->center.y};
    doc["angles"] = s->region_radius->size();
  }
  return doc;
}

}  // namespace ewt

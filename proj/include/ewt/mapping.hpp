#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ewt/kernels.hpp"
#include "ewt/partition.hpp"
#include "ewt/spectral.hpp"

namespace ewt {

/// gamma(xi) = A (xi - eta)
struct AffineMap {
  Mat2 A;
  Vec2 eta;
};

/// Displacement samples on a square canvas over u in [-half, half]^2.
/// Sample k sits at u = -half + (k + 1/2) * (2 half / size); values are in
/// u units and vanish (bilinearly) outside the canvas.
struct DisplacementCanvas {
  int size = 0;
  double half = 1.0;
  RealImage dx;
  RealImage dy;

  DisplacementCanvas() = default;
  DisplacementCanvas(int n, double half_width);

  double spacing() const { return 2.0 * half / size; }
  Vec2 position(int i, int j) const {
    return {-half + (i + 0.5) * spacing(), -half + (j + 0.5) * spacing()};
  }
  Vec2 sample(Vec2 u) const;
  /// s'(u) = -s(-u)
  DisplacementCanvas reflected() const;
};

/// gamma(xi) = T^{-1}(A (xi - eta)) with T(u) = u + s(u); `to_kernel` holds
/// the displacement of T^{-1}, `to_region` that of T.
struct DenseMap {
  AffineMap affine;
  DisplacementCanvas to_region;
  DisplacementCanvas to_kernel;
};

/// Radial rescaling about `center`: gamma(xi) = (xi - c) * rho_L(theta) / rho_R(theta),
/// with the region boundary radius rho_R tabulated over angles.
struct StarMap {
  Vec2 center;
  KernelSupport support;
  std::shared_ptr<const std::vector<double>> region_radius;

  double scale(double theta) const;
};

struct MapMetadata {
  std::string estimator = "affine";
  int region = 0;
  double residual = 0.0;          ///< sample mismatch between region and gamma^{-1}(Lambda)
  double affine_residual = 0.0;
  double inverse_residual = 0.0;  ///< max |T(gamma(xi)) - A(xi - eta)| on region samples, in samples
  double sigma = 0.0;
  int levels = 0;
  std::vector<std::string> warnings;
};

class Diffeomorphism {
 public:
  using Variant = std::variant<AffineMap, DenseMap, StarMap>;

  explicit Diffeomorphism(Variant v) : map_(std::move(v)) {}
  static Diffeomorphism identity() { return Diffeomorphism(AffineMap{}); }
  static Diffeomorphism affine(Mat2 A, Vec2 eta);

  /// gamma(xi)
  Vec2 operator()(Vec2 xi) const;
  /// gamma^{-1}(u)
  Vec2 inverse(Vec2 u) const;
  /// xi -> -gamma(-xi)
  Diffeomorphism mirrored() const;

  /// |det J_gamma(xi)|; closed form for affine and star maps, central
  /// differences with steps h for dense maps.
  double jacobian_det(Vec2 xi, Vec2 h) const;

  const Variant& variant() const { return map_; }
  const AffineMap* as_affine() const { return std::get_if<AffineMap>(&map_); }
  const DenseMap* as_dense() const { return std::get_if<DenseMap>(&map_); }
  const StarMap* as_star() const { return std::get_if<StarMap>(&map_); }
  std::string kind() const;

  MapMetadata meta;

 private:
  Variant map_;
};

inline constexpr double jacobian_floor = 1e-8;

/// Per-sample |det J|, floored at jacobian_floor; the number of floored
/// samples is written to `floored` when given.
RealImage jacobian_det_field(const Diffeomorphism& map, const FrequencyGrid& grid, std::size_t* floored = nullptr);

/// Centroid-centred diagonal map of the region's bounding box (half a sample
/// wider than the outermost samples) onto the support's bounding box. Regions
/// touching the grid border are mapped onto `unbounded_margin` times that box.
Diffeomorphism affine_map_for_region(const RegionMask& region, const KernelSupport& support,
                                     double unbounded_margin = 1.25);

/// Affine map fitted on the union of a region and the mirror image of its
/// partner's samples, so the mirrored map also covers the partner's samples
/// on the Nyquist lines.
Diffeomorphism affine_map_for_pair(const RegionMask& region, const RegionMask& partner, const KernelSupport& support,
                                   double unbounded_margin = 1.25);

/// Radial map for regions that are star-shaped about their centroid.
Diffeomorphism star_shaped_map(const RegionMask& region, const KernelSupport& support, int angles = 2048);

/// Number of grid samples where [xi in region] and [gamma(xi) in Lambda] differ.
std::size_t mapping_mismatch(const Diffeomorphism& map, const RegionMask& region, const KernelSupport& support);

nlohmann::json map_to_json(const Diffeomorphism& map);

}  // namespace ewt

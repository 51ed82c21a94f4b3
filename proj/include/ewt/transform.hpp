#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewt/filterbank.hpp"

namespace ewt {

/// E_n(b) for every band, b on the full integer grid.
struct CoefficientSet {
  int width = 0;
  int height = 0;
  std::vector<int> indices;
  std::vector<ComplexField> bands;
  std::uint64_t lineage = 0;
  double step = 1.0;

  std::size_t position(int n) const;
  const ComplexField& band(int n) const { return bands[position(n)]; }
};

struct DualFilterBank {
  int width = 0;
  int height = 0;
  std::vector<int> indices;
  std::vector<ComplexField> filters;
  std::uint64_t lineage = 0;
  double eps = 0.0;
  double floor = 0.0;       ///< eps * max D
  SampleMask zero_coverage;  ///< samples where D <= floor
  std::size_t zero_count = 0;

  double zero_fraction() const {
    return zero_coverage.size() ? static_cast<double>(zero_count) / static_cast<double>(zero_coverage.size()) : 0.0;
  }
};

/// E_n = F^{-1}(f_hat * conj(psi_n)).
CoefficientSet forward(const RealImage& f, const FilterBank& bank);
CoefficientSet forward_spectrum(const ComplexField& spectrum, const FilterBank& bank);

/// psi_n / max(D, eps * max D).
DualFilterBank dual_bank(const FilterBank& bank, double eps = 1e-12);
/// psi_n / A for a tight bank with bound A.
DualFilterBank tight_dual(const FilterBank& bank, double A);

struct Reconstruction {
  RealImage image;
  double imag_residual = 0.0;  ///< max |Im| of the inverse transform
};

Reconstruction reconstruct(const CoefficientSet& coeffs, const DualFilterBank& duals);

struct ParsevalResidual {
  Vec2 alpha;
  double residual = 0.0;
};

struct DiscreteBounds {
  double A = 0.0;
  double B = 0.0;
  double tail = 0.0;  ///< sup of the next two shells beyond the radius
  int radius = 0;
  bool frame() const { return A > 0.0; }
};

struct FrameReport {
  double A = 0.0;
  double B = 0.0;
  bool tight = false;
  std::optional<double> cross_energy;  ///< symmetric banks: max sum_n |psi_n| |psi_-n|
  std::vector<ParsevalResidual> parseval;
  bool parseval_approximate = false;
  std::optional<DiscreteBounds> discrete;
  std::vector<std::string> warnings;
};

/// Continuous part: min/max of D, tight flag at relative tolerance 1e-9.
FrameReport frame_bounds(const FilterBank& bank);

/// max over the grid of |sum_n b^-N psi_n(xi) conj(psi_n(xi + alpha)) - delta_{alpha,0}|
/// for alpha in b^-1 Z^N with |k|_inf <= radius. Non-compact kernels add a
/// warning and mark the table approximate.
std::vector<ParsevalResidual> discrete_parseval_check(const FilterBank& bank, double step = 1.0, int radius = 3,
                                                      bool* approximate = nullptr,
                                                      std::vector<std::string>* warnings = nullptr);

DiscreteBounds discrete_frame_bounds(const FilterBank& bank, double step = 1.0, int radius = 3);

/// |E_n|^2 per sample.
RealImage wavelet_spectrum(const CoefficientSet& coeffs, int n);

nlohmann::json frame_report_to_json(const FrameReport& r);

}  // namespace ewt

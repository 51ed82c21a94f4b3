#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ewt/kernels.hpp"
#include "ewt/mapping.hpp"
#include "ewt/partition.hpp"

namespace ewt {

/// Jacobian: sqrt|det J| * psi_hat(gamma(xi)). Unit: psi_hat(gamma(xi)).
enum class FilterNormalization { Jacobian, Unit };

/// Filter value at an arbitrary frequency, including points off the grid.
using FilterEvaluator = std::function<Complex(Vec2)>;

struct EmpiricalFilter {
  int index = 0;
  ComplexField samples;
  std::string source;  ///< kind of map the filter came from
  FilterEvaluator evaluate;  ///< may be empty
};

enum class BankKind { Plain, Symmetric };

struct FilterBank {
  BankKind kind = BankKind::Plain;
  int width = 0;
  int height = 0;
  std::vector<int> indices;
  std::vector<ComplexField> filters;
  /// Off-grid evaluators, parallel to filters; empty when unavailable.
  std::vector<FilterEvaluator> evaluators;
  RealImage denominator;  ///< sum_n |filter_n|^2
  std::string kernel;
  std::string mapper;
  std::string partition_hash;
  bool compact = false;  ///< kernel has compact support
  std::uint64_t lineage = 0;
  /// Plain bank a symmetric bank was derived from.
  std::shared_ptr<const FilterBank> plain;

  std::size_t size() const { return filters.size(); }
  /// Position of index n, or throws.
  std::size_t position(int n) const;
  const ComplexField& filter(int n) const { return filters[position(n)]; }
  void compute_denominator();
  bool has_evaluators() const { return !evaluators.empty(); }
};

EmpiricalFilter build_filter(const WaveletKernel& kernel, const Diffeomorphism& map, const FrequencyGrid& grid, int n,
                             FilterNormalization norm = FilterNormalization::Jacobian);

/// Assembles filters into a bank and computes its denominator.
FilterBank make_bank(std::vector<EmpiricalFilter> filters, BankKind kind = BankKind::Plain);

/// chi_0 = psi_0, chi_n = (psi_n + psi_{-n}) / sqrt 2 for n > 0.
FilterBank build_symmetric_bank(const FilterBank& plain);

/// psi_n(x) = |det A|^{-1/2} psi(A^{-T} x) e^{2 pi i eta.x}, periodized over
/// the grid. Diagonal maps of separable kernels use the exact periodized
/// axis factors; anything else sums spatial lattice images.
ComplexField spatial_filter_affine(const WaveletKernel& kernel, const Mat2& A, Vec2 eta, const FrequencyGrid& grid,
                                   int image_radius = 4);

/// Separable bank with gamma_{j,n}(xi) = 2^j (xi - omega_n) at the centres
/// (w0, 0), (0, w0), (w0, w0); filter index 3 j + n.
FilterBank dyadic_bank_2d(int levels, double omega0, const WaveletKernel& kernel1d, const FrequencyGrid& grid);

/// FNV-1a digest of a label map, as 16 hex digits.
std::string partition_hash(const PartitionLabelMap& p);

}  // namespace ewt

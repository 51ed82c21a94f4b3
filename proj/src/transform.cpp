#include "ewt/transform.hpp"

#include <algorithm>
#include <cmath>

namespace ewt {

namespace {

void require_same_grid(int w, int h, const FilterBank& bank) {
  if (w != bank.width || h != bank.height)
    throw ValidationError("image is " + std::to_string(w) + "x" + std::to_string(h) + " but the bank is " +
                          std::to_string(bank.width) + "x" + std::to_string(bank.height));
}

std::vector<Vec2> shifts(const FrequencyGrid& g, double step, int r_min, int r_max) {
  std::vector<Vec2> out;
  const int ry = g.is_1d() ? 0 : r_max;
  for (int l = -ry; l <= ry; ++l)
    for (int m = -r_max; m <= r_max; ++m) {
      const int ring = std::max(std::abs(l), std::abs(m));
      if (ring < r_min || ring > r_max) continue;
      out.push_back({m / step, l / step});
    }
  return out;
}

// Filter value at xi + alpha: the evaluator when there is one, otherwise the
// grid sample if xi + alpha is on the grid, otherwise 0.
class ShiftedValue {
 public:
  ShiftedValue(const FilterBank& bank, const FrequencyGrid& g) : bank_(bank), grid_(g) {}

  Complex operator()(std::size_t pos, int i, int j, Vec2 alpha) const {
    const Vec2 xi = grid_.xi(i, j) + alpha;
    if (bank_.has_evaluators()) return bank_.evaluators[pos](xi);
    const double fi = alpha.x * grid_.width(), fj = alpha.y * grid_.height();
    if (std::abs(fi - std::round(fi)) > 1e-9 || std::abs(fj - std::round(fj)) > 1e-9) return 0.0;
    const int ii = i + static_cast<int>(std::lround(fi)), jj = j + static_cast<int>(std::lround(fj));
    if (ii < 0 || jj < 0 || ii >= grid_.width() || jj >= grid_.height()) return 0.0;
    return bank_.filters[pos](ii, jj);
  }

 private:
  const FilterBank& bank_;
  const FrequencyGrid& grid_;
};

double dimension_weight(const FrequencyGrid& g, double step) { return std::pow(step, g.is_1d() ? -1.0 : -2.0); }

}  // namespace

std::size_t CoefficientSet::position(int n) const {
  for (std::size_t k = 0; k < indices.size(); ++k)
    if (indices[k] == n) return k;
  throw ValidationError("coefficient set has no band " + std::to_string(n));
}

CoefficientSet forward_spectrum(const ComplexField& spectrum, const FilterBank& bank) {
  require_same_grid(spectrum.width, spectrum.height, bank);
  CoefficientSet c;
  c.width = bank.width;
  c.height = bank.height;
  c.indices = bank.indices;
  c.lineage = bank.lineage;
  for (const auto& psi : bank.filters) {
    ComplexField prod(bank.width, bank.height);
    for (std::size_t k = 0; k < prod.size(); ++k) prod.data[k] = spectrum.data[k] * std::conj(psi.data[k]);
    c.bands.push_back(fft_inverse(prod));
  }
  return c;
}

CoefficientSet forward(const RealImage& f, const FilterBank& bank) {
  require_same_grid(f.width, f.height, bank);
  require_finite(f, "input image");
  return forward_spectrum(fft_forward(to_complex(f)), bank);
}

DualFilterBank dual_bank(const FilterBank& bank, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("dual floor must be non-negative");
  const auto& D = bank.denominator;
  const double max_d = D.data.empty() ? 0.0 : *std::max_element(D.data.begin(), D.data.end());
  if (!(max_d > 0.0)) throw NumericalError("filter bank denominator vanishes everywhere");
  DualFilterBank d;
  d.width = bank.width;
  d.height = bank.height;
  d.indices = bank.indices;
  d.lineage = bank.lineage;
  d.eps = eps;
  d.floor = eps * max_d;
  d.zero_coverage = SampleMask(bank.width, bank.height, 0);
  RealImage denom(bank.width, bank.height);
  for (std::size_t k = 0; k < D.size(); ++k) {
    if (D.data[k] <= d.floor) {
      d.zero_coverage.data[k] = 1;
      ++d.zero_count;
    }
    denom.data[k] = std::max(D.data[k], d.floor);
  }
  for (const auto& psi : bank.filters) {
    ComplexField dual(bank.width, bank.height);
    for (std::size_t k = 0; k < dual.size(); ++k)
      dual.data[k] = denom.data[k] > 0.0 ? psi.data[k] / denom.data[k] : Complex(0.0);
    d.filters.push_back(std::move(dual));
  }
  return d;
}

DualFilterBank tight_dual(const FilterBank& bank, double A) {
  if (!(A > 0.0)) throw ValidationError("tight frame bound must be positive");
  DualFilterBank d;
  d.width = bank.width;
  d.height = bank.height;
  d.indices = bank.indices;
  d.lineage = bank.lineage;
  d.zero_coverage = SampleMask(bank.width, bank.height, 0);
  for (const auto& psi : bank.filters) {
    ComplexField dual(bank.width, bank.height);
    for (std::size_t k = 0; k < dual.size(); ++k) dual.data[k] = psi.data[k] / A;
    d.filters.push_back(std::move(dual));
  }
  return d;
}

Reconstruction reconstruct(const CoefficientSet& coeffs, const DualFilterBank& duals) {
  if (coeffs.lineage != duals.lineage || coeffs.indices != duals.indices)
    throw ValidationError("coefficients and dual filters come from different banks");
  ComplexField acc(coeffs.width, coeffs.height);
  for (std::size_t n = 0; n < coeffs.bands.size(); ++n) {
    const ComplexField spec = fft_forward(coeffs.bands[n]);
    const auto& dual = duals.filters[n];
    for (std::size_t k = 0; k < acc.size(); ++k) acc.data[k] += spec.data[k] * dual.data[k];
  }
  const ComplexField x = fft_inverse(acc);
  Reconstruction r;
  r.image = real_part(x);
  for (const auto& v : x.data) r.imag_residual = std::max(r.imag_residual, std::abs(v.imag()));
  require_finite(r.image, "reconstruction");
  return r;
}

FrameReport frame_bounds(const FilterBank& bank) {
  FrameReport r;
  const auto& D = bank.denominator.data;
  if (D.empty()) throw ValidationError("empty filter bank");
  const auto [lo, hi] = std::minmax_element(D.begin(), D.end());
  r.A = *lo;
  r.B = *hi;
  r.tight = r.B - r.A <= 1e-9 * r.B;
  if (bank.kind == BankKind::Symmetric && bank.plain) {
    const FilterBank& p = *bank.plain;
    std::vector<double> cross(D.size(), 0.0);
    for (int n : p.indices) {
      if (n <= 0) continue;
      const auto& a = p.filter(n);
      const auto& b = p.filter(-n);
      for (std::size_t k = 0; k < cross.size(); ++k) cross[k] += std::abs(a.data[k]) * std::abs(b.data[k]);
    }
    r.cross_energy = *std::max_element(cross.begin(), cross.end());
  }
  return r;
}

std::vector<ParsevalResidual> discrete_parseval_check(const FilterBank& bank, double step, int radius,
                                                      bool* approximate, std::vector<std::string>* warnings) {
  if (!(step > 0.0)) throw ValidationError("translation step must be positive");
  if (radius < 0) throw ValidationError("shift radius must be non-negative");
  const FrequencyGrid g(bank.width, bank.height);
  const double wgt = dimension_weight(g, step);
  if (approximate) *approximate = !bank.compact;
  if (warnings && !bank.compact)
    warnings->push_back("parseval check on a non-compact kernel (" + bank.kernel + ") is approximate");
  if (warnings && !bank.has_evaluators())
    warnings->push_back("no off-grid filter evaluators: shifted values outside the grid are taken as 0");

  const ShiftedValue shifted(bank, g);
  std::vector<ParsevalResidual> table;
  for (const Vec2 alpha : shifts(g, step, 0, radius)) {
    const bool zero = alpha.x == 0.0 && alpha.y == 0.0;
    double worst = 0.0;
    for (int j = 0; j < g.height(); ++j)
      for (int i = 0; i < g.width(); ++i) {
        Complex acc = 0.0;
        for (std::size_t n = 0; n < bank.size(); ++n) {
          const Complex a = bank.filters[n](i, j);
          if (a == Complex(0.0)) continue;
          acc += a * std::conj(zero ? a : shifted(n, i, j, alpha));
        }
        worst = std::max(worst, std::abs(wgt * acc - (zero ? 1.0 : 0.0)));
      }
    table.push_back({alpha, worst});
  }
  return table;
}

DiscreteBounds discrete_frame_bounds(const FilterBank& bank, double step, int radius) {
  if (!(step > 0.0)) throw ValidationError("translation step must be positive");
  if (radius < 1) throw ValidationError("shift radius must be at least 1");
  const FrequencyGrid g(bank.width, bank.height);
  const double wgt = dimension_weight(g, step);
  const ShiftedValue shifted(bank, g);
  const auto inner = shifts(g, step, 1, radius);
  const auto outer = shifts(g, step, radius + 1, radius + 2);

  // Products below tau * peak_n are skipped; their worst case goes to the tail.
  std::vector<double> peak(bank.size(), 0.0);
  for (std::size_t n = 0; n < bank.size(); ++n)
    for (const auto& v : bank.filters[n].data) peak[n] = std::max(peak[n], std::abs(v));
  constexpr double tau = 1e-20;
  double skipped = 0.0;
  for (double p : peak) skipped += tau * p * p;
  skipped *= wgt * static_cast<double>(inner.size() + outer.size());

  DiscreteBounds out;
  out.radius = radius;
  out.A = INFINITY;
  out.B = 0.0;
  double tail = 0.0;
  for (int j = 0; j < g.height(); ++j)
    for (int i = 0; i < g.width(); ++i) {
      double diag = 0.0, cross = 0.0, far = 0.0;
      for (std::size_t n = 0; n < bank.size(); ++n) {
        const double a = std::abs(bank.filters[n](i, j));
        diag += a * a;
        if (a <= tau * peak[n]) continue;
        for (const Vec2 k : inner) cross += a * std::abs(shifted(n, i, j, -1.0 * k));
        for (const Vec2 k : outer) far += a * std::abs(shifted(n, i, j, -1.0 * k));
      }
      out.A = std::min(out.A, wgt * (diag - cross));
      out.B = std::max(out.B, wgt * (diag + cross));
      tail = std::max(tail, wgt * far);
    }
  out.tail = tail + skipped;
  return out;
}

RealImage wavelet_spectrum(const CoefficientSet& coeffs, int n) {
  const auto& e = coeffs.band(n);
  RealImage out(e.width, e.height);
  for (std::size_t k = 0; k < out.size(); ++k) out.data[k] = std::norm(e.data[k]);
  return out;
}

nlohmann::json frame_report_to_json(const FrameReport& r) {
  nlohmann::json j;
  j["A"] = r.A;
  j["B"] = r.B;
  j["tight"] = r.tight;
  if (r.cross_energy) j["cross_energy"] = *r.cross_energy;
  auto table = nlohmann::json::array();
  for (const auto& p : r.parseval) table.push_back({{"alpha", {p.alpha.x, p.alpha.y}}, {"residual", p.residual}});
  j["parseval_residuals"] = table;
  j["parseval_approximate"] = r.parseval_approximate;
  if (r.discrete)
    j["discrete_bounds"] = {{"A", r.discrete->A}, {"B", r.discrete->B}, {"tail", r.discrete->tail},
                            {"radius", r.discrete->radius}};
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace ewt

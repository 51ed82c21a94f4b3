// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ewt/pipeline.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ewt;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int k, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", k, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// Runs a check and turns exceptions into a FAIL line.
void criterion(int k, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    report(k, ok, detail);
  } catch (const std::exception& e) {
    report(k, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Stages {
  RealImage image;
  ComplexField spectrum;
  PartitionLabelMap partition;
  WaveletKernel kernel;
  MappingStage maps;
  FilterBank plain;
};

Stages run_stages(const PipelineConfig& cfg) {
  Stages s;
  s.image = load_input(cfg);
  s.spectrum = fft_forward(to_complex(s.image));
  s.partition = partition_stage(detect_stage(s.spectrum, cfg), cfg);
  s.kernel = pipeline_kernel(cfg, grid_of(s.image));
  s.maps = mapping_stage(s.partition, s.kernel, cfg);
  s.plain = filter_stage(s.partition, s.maps, s.kernel);
  return s;
}

PipelineConfig toy_config(int w, int h, int waves, const std::string& kernel, const std::string& mapper) {
  PipelineConfig c;
  c.toy.width = w;
  c.toy.height = h;
  c.toy.waves = waves;
  c.kernel = kernel;
  c.mapper = mapper;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  // 1. gabor, voronoi, demons on the 256 toy
  criterion(1, [] {
    const auto cfg = toy_config(256, 256, 5, "gabor", "demons");
    const auto t0 = std::chrono::steady_clock::now();
    const RunReport r = run_pipeline(cfg);
    const double t = seconds_since(t0);
    return std::pair{r.mse <= 1e-20 && t <= 60.0, fmt("mse %.3e (<= 1e-20), runtime %.1f s (<= 60 s)", r.mse, t)};
  });

  // 2. shannon full coverage, then one band removed
  criterion(2, [] {
    const auto cfg = toy_config(256, 256, 5, "shannon", "affine");
    const RunReport r = run_pipeline(cfg);
    const Stages s = run_stages(cfg);
    const FilterBank sym = build_symmetric_bank(s.plain);
    // drop the first bounded band n > 0
    int dropped = -1;
    for (const auto& region : s.maps.regions)
      if (region.index > 0 && region.bounded && s.maps.region(-region.index).bounded) {
        dropped = region.index;
        break;
      }
    if (dropped < 0) return std::pair{false, std::string("no bounded band to remove")};
    std::vector<EmpiricalFilter> kept;
    for (std::size_t n = 0; n < sym.size(); ++n)
      if (sym.indices[n] != dropped) kept.push_back({sym.indices[n], sym.filters[n], "affine", {}});
    const FilterBank punctured = make_bank(kept, BankKind::Symmetric);
    const DualFilterBank d = dual_bank(punctured);
    const Reconstruction rec = reconstruct(forward(s.image, punctured), d);
    const double err = mse(rec.image, s.image);
    const double gap = band_energy(s.spectrum, d.zero_coverage) / static_cast<double>(s.image.size());
    const double rel = std::abs(err - gap) / gap;
    return std::pair{r.mse <= 1e-20 && gap > 0 && rel <= 1e-9,
                     fmt("mse %.3e (<= 1e-20); band removed: mse %.6e vs gap energy %.6e", r.mse, err, gap) +
                         fmt(", rel %.1e (<= 1e-9)", rel)};
  });

  // 3. disjoint shannon cover with unit-scaled filters
  criterion(3, [] {
    FrequencyGrid g(64, 64);
    const FilterBank bank = fixture::shannon_box_bank(g, 4, FilterNormalization::Unit);
    const FrameReport f = frame_bounds(bank);
    bool approx = true;
    double worst = 0.0;
    const auto table = discrete_parseval_check(bank, 1.0, 3, &approx);
    for (const auto& row : table) worst = std::max(worst, row.residual);
    const double dev = std::max(std::abs(f.A - 1.0), std::abs(f.B - 1.0));
    return std::pair{dev <= 1e-12 && worst <= 1e-12 && table.size() == 49 && !approx,
                     fmt("|A-1|,|B-1| max %.1e (<= 1e-12); parseval residual max %.1e over %g shifts (<= 1e-12)", dev,
                         worst, static_cast<double>(table.size()))};
  });

  // 4. 1D pipeline against the closed-form filters
  criterion(4, [] {
    const auto cfg = toy_config(512, 1, 2, "gabor", "affine");
    const Stages s = run_stages(cfg);
    const FrequencyGrid g = grid_of(s.image);
    const double W = g.width();
    const auto masks = region_masks(s.partition);
    auto mask_of = [&](int n) -> const RegionMask& {
      for (const auto& m : masks)
        if (m.index == n) return m;
      throw std::runtime_error("missing region");
    };
    double freq_dev = 0.0, spatial_dev = 0.0;
    int spatial_bands = 0;
    const FilterBank sym = build_symmetric_bank(s.plain);
    for (const auto& region : masks) {
      if (region.index < 0) continue;
      const RegionMask& partner = mask_of(-region.index);
      int lo = INT_MAX, hi = INT_MIN;
      for (int i = 0; i < g.width(); ++i) {
        if (region.mask(i, 0)) lo = std::min(lo, g.offset_i(i)), hi = std::max(hi, g.offset_i(i));
        if (partner.mask(i, 0)) lo = std::min(lo, -g.offset_i(i)), hi = std::max(hi, -g.offset_i(i));
      }
      const bool bounded = region.bounded && partner.bounded;
      const double margin = bounded ? 1.0 : cfg.mapping.unbounded_margin;
      const double width = (hi - lo + 1) / W / margin;
      const double omega = 0.5 * (hi + lo) / W;
      for (int sign : {1, -1}) {
        if (region.index == 0 && sign < 0) continue;
        const ComplexField& f = s.plain.filter(sign * region.index);
        for (int i = 0; i < g.width(); ++i) {
          const double xi = g.xi(i, 0).x;
          const Complex expect = std::pow(width, -0.5) * s.kernel.fourier({(xi - sign * omega) / width, 0.0});
          freq_dev = std::max(freq_dev, std::abs(f(i, 0) - expect));
        }
      }
      if (region.index == 0 || !bounded) continue;
      // spatial form of the symmetric filter on the periodic grid
      const ComplexField chi = fft_inverse(sym.filter(region.index));
      ++spatial_bands;
      for (int x = 0; x < g.width(); ++x) {
        double expect = 0.0;
        for (int k = -2; k <= 2; ++k) {
          const double t = x + k * W;
          expect += std::sqrt(2.0 * width) * gabor1d_spatial(width * t) * std::cos(2.0 * oracle::pi * omega * t);
        }
        spatial_dev = std::max(spatial_dev, std::abs(chi(x, 0) - expect));
      }
    }
    return std::pair{freq_dev <= 1e-12 && spatial_dev <= 1e-10 && spatial_bands > 0,
                     fmt("filter deviation %.1e (<= 1e-12); symmetric spatial deviation %.1e over %g bands (<= 1e-10)",
                         freq_dev, spatial_dev, spatial_bands)};
  });

  // 5. spatial and Fourier affine constructions
  criterion(5, [] {
    const auto sh = make_shannon_kernel();
    FrequencyGrid g(128, 128);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> scale(2.5, 16.0), centre(-0.3, 0.3), sign(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 8; ++t) {
      const Mat2 A = Mat2::diagonal(std::copysign(scale(rng), sign(rng)), std::copysign(scale(rng), sign(rng)));
      const Vec2 eta{centre(rng), centre(rng)};
      const ComplexField spatial = spatial_filter_affine(sh, A, eta, g);
      const EmpiricalFilter fourier = build_filter(sh, Diffeomorphism::affine(A, eta), g, 1);
      worst = std::max(worst, oracle::max_abs_diff(fft_forward(spatial), fourier.samples));
    }
    return std::pair{worst <= 1e-6, fmt("max deviation %.2e over 8 maps (<= 1e-6)", worst)};
  });

  // 6. forward transform against direct inner products
  criterion(6, [] {
    FrequencyGrid g(16, 16);
    const auto f = oracle::random_image(16, 16, 99);
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> pick(0, 15);
    double worst = 0.0;
    for (const FilterBank& bank : {fixture::gabor_lattice_bank(g), fixture::shannon_box_bank(g, 4)}) {
      const CoefficientSet c = forward(f, bank);
      for (std::size_t n = 0; n < bank.size(); ++n) {
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
          Complex direct = 0;
          for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) direct += f(x, y) * std::conj(psi((x - bx + 16) % 16, (y - by + 16) % 16));
          worst = std::max(worst, std::abs(c.bands[n](bx, by) - direct));
        }
      }
    }
    return std::pair{worst <= 1e-10, fmt("max deviation %.2e at 10 translations per filter (<= 1e-10)", worst)};
  });

  // 7. detection of 5 planted pairs across the s0 band
  criterion(7, [] {
    bool ok = true;
    double min_snr = INFINITY;
    int runs = 0;
    for (std::uint64_t seed : {7u, 11u, 23u}) {
      const auto clean = make_toy_image(256, 256, 5, seed, 0.0);
      const auto noisy = make_toy_image(256, 256, 5, seed, 0.1);
      double mean = 0.0, sig = 0.0, noise = 0.0;
      for (double v : clean.image.data) mean += v;
      mean /= static_cast<double>(clean.image.size());
      for (std::size_t k = 0; k < clean.image.size(); ++k) {
        sig += (clean.image.data[k] - mean) * (clean.image.data[k] - mean);
        noise += (noisy.image.data[k] - clean.image.data[k]) * (noisy.image.data[k] - clean.image.data[k]);
      }
      min_snr = std::min(min_snr, sig / noise);
      std::set<std::pair<int, int>> truth{{0, 0}};
      for (const auto& w : noisy.waves) truth.insert({w.di, w.dj}), truth.insert({-w.di, -w.dj});
      const RealImage ls = log_magnitude(dft2(noisy.image));
      for (double s0 = 0.4; s0 <= 1.2 + 1e-9; s0 += 0.1) {
        ScaleSpaceParams p;
        p.s0 = s0;
        const ModeSet m = symmetrize_modes(detect_modes(ls, p));
        std::set<std::pair<int, int>> got;
        for (const auto& x : m.modes) got.insert({x.di, x.dj});
        ok = ok && got == truth;
        ++runs;
      }
    }
    return std::pair{ok && min_snr >= 10.0,
                     fmt("5 pairs + DC in every run (%g runs, s0 0.4..1.2); min power SNR %.1f (>= 10)", runs, min_snr)};
  });

  // 8. property suites
  criterion(8, [] {
    std::vector<std::string> failed;
    auto need = [&](bool ok, const std::string& what) {
      if (!ok) failed.push_back(what);
    };

    // grid Parseval identity
    for (auto [w, h] : {std::pair{64, 64}, std::pair{37, 20}, std::pair{128, 1}}) {
      const auto f = oracle::random_image(w, h, static_cast<std::uint64_t>(w * h));
      double spatial = 0.0;
      for (double v : f.data) spatial += v * v;
      const double freq = spectral_energy(fft_forward(to_complex(f)));
      need(std::abs(spatial - freq) <= 1e-12 * spatial, "grid parseval");
    }

    const auto cfg = toy_config(128, 128, 5, "gabor", "demons");
    const Stages s = run_stages(cfg);
    const FrequencyGrid g = grid_of(s.image);

    // disjoint cover for both partition methods
    for (const auto& method : {"voronoi", "watershed"}) {
      PipelineConfig c = cfg;
      c.partition = method;
      const PartitionLabelMap p = partition_stage(detect_stage(s.spectrum, c), c);
      const auto labels = p.label_set();
      const std::set<int> allowed(labels.begin(), labels.end());
      std::size_t covered = 0;
      for (int v : p.labels.data) covered += allowed.count(v);
      std::vector<int> hits(p.labels.size(), 0);
      for (const auto& r : region_masks(p))
        for (std::size_t k = 0; k < hits.size(); ++k) hits[k] += r.mask.data[k];
      const bool once = std::all_of(hits.begin(), hits.end(), [](int v) { return v == 1; });
      need(covered == p.labels.size() && once && validate_partition(p).valid(), std::string("cover ") + method);
    }

    // round trip and jacobian positivity for every fitted map
    double worst_trip = 0.0;
    std::size_t floored_total = 0;
    for (const auto& region : s.maps.regions) {
      const Diffeomorphism& m = s.maps.map(region.index);
      for (int j = 0; j < g.height(); ++j)
        for (int i = 0; i < g.width(); ++i) {
          if (!region.mask(i, j)) continue;
          const Vec2 xi = g.xi(i, j);
          const Vec2 back = m.inverse(m(xi));
          worst_trip = std::max({worst_trip, std::abs(back.x - xi.x) * g.width(), std::abs(back.y - xi.y) * g.height()});
        }
      std::size_t floored = 0;
      const RealImage jac = jacobian_det_field(m, g, &floored);
      floored_total += floored;
      need(std::all_of(jac.data.begin(), jac.data.end(), [](double v) { return v > 0.0; }), "jacobian positivity");
    }
    need(worst_trip <= 0.5, "round trip");
    need(floored_total == 0, "jacobian floor");

    // bounds can only drop as bands are removed
    FilterBank bank = build_symmetric_bank(s.plain);
    FrameReport prev = frame_bounds(bank);
    bool monotone = true;
    std::vector<EmpiricalFilter> rest;
    for (std::size_t n = 0; n < bank.size(); ++n) rest.push_back({bank.indices[n], bank.filters[n], "demons", {}});
    while (rest.size() > 1) {
      rest.pop_back();
      const FrameReport cur = frame_bounds(make_bank(rest, BankKind::Symmetric));
      monotone = monotone && cur.A <= prev.A && cur.B <= prev.B;
      prev = cur;
    }
    need(monotone, "frame bound monotonicity");

    // two runs write identical bytes
    PipelineConfig small = toy_config(64, 64, 3, "gabor", "demons");
    small.frame.parseval_radius = small.frame.discrete_radius = 1;
    const fs::path root = fs::temp_directory_path() / "ewt_acceptance";
    fs::remove_all(root);
    small.out = (root / "a").string();
    RunReport a = run_pipeline(small);
    small.out = (root / "b").string();
    RunReport b = run_pipeline(small);
    a.config["out"] = b.config["out"] = "";
    bool same = report_to_json(a, false).dump() == report_to_json(b, false).dump();
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
      if (!e.is_regular_file() || e.path().filename() == "report.json") continue;
      same = same && slurp(e.path()) == slurp(root / "b" / fs::relative(e.path(), root / "a"));
      ++files;
    }
    fs::remove_all(root);
    need(same && files > 0, "reproducibility");

    std::string detail = fmt("round trip %.3f samples (<= 0.5), %g floored jacobians", worst_trip,
                             static_cast<double>(floored_total)) +
                         fmt(", %g artifact files compared", static_cast<double>(files));
    for (const auto& f : failed) detail += "; failed: " + f;
    return std::pair{failed.empty(), detail};
  });

  std::printf("%s\n", failures ? "acceptance: FAIL" : "acceptance: PASS");
  return failures ? 1 : 0;
}

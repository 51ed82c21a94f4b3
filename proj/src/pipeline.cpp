#include "ewt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include "ewt/figures.hpp"
#include "ewt/io.hpp"

namespace ewt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs body(k) for k in [0, n) on up to hardware_concurrency threads. Each
// result slot is written by exactly one task; the lowest failing index wins.
template <typename F>
void parallel_for(std::size_t n, F body) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        body(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw ValidationError("unknown key '" + k + "' in " + where);
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class Fnv {
 public:
  void bytes(std::uint64_t v, int n) {
    for (int b = 0; b < n; ++b) {
      h_ ^= (v >> (8 * b)) & 0xffu;
      h_ *= 1099511628211ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

json region_json(const RegionReport& r) {
  return {{"index", r.index},
          {"count", r.count},
          {"bounded", r.bounded},
          {"estimator", r.meta.estimator},
          {"residual", r.meta.residual},
          {"affine_residual", r.meta.affine_residual},
          {"inverse_residual", r.meta.inverse_residual},
          {"sigma", r.meta.sigma},
          {"levels", r.meta.levels},
          {"warnings", r.meta.warnings}};
}

std::string band_file(int n) { return "band_" + std::to_string(n) + ".ewt"; }
std::string filter_file(int n) { return "filter_" + std::to_string(n) + ".ewt"; }

}  // namespace

void PipelineConfig::validate() const {
  if (kernel != "gabor" && kernel != "shannon") throw ValidationError("kernel must be gabor or shannon");
  if (partition != "voronoi" && partition != "watershed") throw ValidationError("partition must be voronoi or watershed");
  if (mapper != "affine" && mapper != "star" && mapper != "demons")
    throw ValidationError("mapper must be affine, star or demons");
  scale_space.validate();
  mapping.validate();
  if (!(watershed_sigma >= 0.0)) throw ValidationError("watershed_sigma must be non-negative");
  if (!(dual_floor >= 0.0)) throw ValidationError("dual floor must be non-negative");
  if (input.empty()) {
    if (toy.width < 2 || toy.height < 1) throw ValidationError("toy image must be at least 2x1");
    if (toy.waves < 1) throw ValidationError("toy image needs at least one wave");
    if (!(toy.noise >= 0.0)) throw ValidationError("toy noise must be non-negative");
  }
  if (frame.parseval_radius < 0) throw ValidationError("parseval radius must be non-negative");
  if (frame.discrete_radius < 1) throw ValidationError("discrete radius must be at least 1");
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  check_keys(j, {"input", "toy", "kernel", "partition", "mapper", "scale_space", "mapping", "watershed_sigma",
                 "dual_floor", "out", "figures", "save_rasters", "frame"},
             "config");
  PipelineConfig c;
  if (j.contains("input") && !j["input"].is_null()) read_field(j, "input", c.input);
  read_field(j, "kernel", c.kernel);
  read_field(j, "partition", c.partition);
  read_field(j, "mapper", c.mapper);
  read_field(j, "watershed_sigma", c.watershed_sigma);
  read_field(j, "dual_floor", c.dual_floor);
  read_field(j, "out", c.out);
  read_field(j, "figures", c.figures);
  read_field(j, "save_rasters", c.save_rasters);
  if (j.contains("toy")) {
    const auto& t = j["toy"];
    check_keys(t, {"width", "height", "waves", "seed", "noise"}, "toy");
    read_field(t, "width", c.toy.width);
    read_field(t, "height", c.toy.height);
    read_field(t, "waves", c.toy.waves);
    read_field(t, "seed", c.toy.seed);
    read_field(t, "noise", c.toy.noise);
  }
  if (j.contains("scale_space")) {
    const auto& s = j["scale_space"];
    check_keys(s, {"s0", "scale_step", "levels", "min_separation", "significance", "relative_floor"}, "scale_space");
    read_field(s, "s0", c.scale_space.s0);
    read_field(s, "scale_step", c.scale_space.scale_step);
    read_field(s, "levels", c.scale_space.num_levels);
    read_field(s, "min_separation", c.scale_space.min_separation);
    read_field(s, "significance", c.scale_space.significance);
    read_field(s, "relative_floor", c.scale_space.relative_floor);
  }
  if (j.contains("mapping")) {
    const auto& m = j["mapping"];
    check_keys(m, {"smoothing", "levels", "min_canvas", "max_canvas", "unbounded_margin"}, "mapping");
    read_field(m, "smoothing", c.mapping.smoothing);
    read_field(m, "levels", c.mapping.levels);
    read_field(m, "min_canvas", c.mapping.min_canvas);
    read_field(m, "max_canvas", c.mapping.max_canvas);
    read_field(m, "unbounded_margin", c.mapping.unbounded_margin);
  }
  if (j.contains("frame")) {
    const auto& f = j["frame"];
    check_keys(f, {"parseval", "parseval_radius", "discrete", "discrete_radius"}, "frame");
    read_field(f, "parseval", c.frame.parseval);
    read_field(f, "parseval_radius", c.frame.parseval_radius);
    read_field(f, "discrete", c.frame.discrete);
    read_field(f, "discrete_radius", c.frame.discrete_radius);
  }
  return c;
}

json PipelineConfig::to_json() const {
  return {{"input", input.empty() ? json(nullptr) : json(input)},
          {"toy", {{"width", toy.width}, {"height", toy.height}, {"waves", toy.waves}, {"seed", toy.seed},
                   {"noise", toy.noise}}},
          {"kernel", kernel},
          {"partition", partition},
          {"mapper", mapper},
          {"scale_space", {{"s0", scale_space.s0}, {"scale_step", scale_space.scale_step},
                           {"levels", scale_space.num_levels}, {"min_separation", scale_space.min_separation},
                           {"significance", scale_space.significance},
                           {"relative_floor", scale_space.relative_floor}}},
          {"mapping", {{"smoothing", mapping.smoothing}, {"levels", mapping.levels},
                       {"min_canvas", mapping.min_canvas}, {"max_canvas", mapping.max_canvas},
                       {"unbounded_margin", mapping.unbounded_margin}}},
          {"watershed_sigma", watershed_sigma},
          {"dual_floor", dual_floor},
          {"out", out},
          {"figures", figures},
          {"save_rasters", save_rasters},
          {"frame", {{"parseval", frame.parseval}, {"parseval_radius", frame.parseval_radius},
                     {"discrete", frame.discrete}, {"discrete_radius", frame.discrete_radius}}}};
}

const Diffeomorphism& MappingStage::map(int label) const {
  for (std::size_t k = 0; k < regions.size(); ++k)
    if (regions[k].index == label) return maps[k];
  throw ValidationError("no map for region " + std::to_string(label));
}

const RegionMask& MappingStage::region(int label) const {
  for (const auto& r : regions)
    if (r.index == label) return r;
  throw ValidationError("no region " + std::to_string(label));
}

WaveletKernel pipeline_kernel(const PipelineConfig& cfg, const FrequencyGrid& grid) {
  return make_kernel(cfg.kernel, grid.is_1d() ? 1 : 2);
}

RealImage load_input(const PipelineConfig& cfg, std::vector<PlantedWave>* truth) {
  if (!cfg.input.empty()) return read_image(cfg.input);
  auto toy = make_toy_image(cfg.toy.width, cfg.toy.height, cfg.toy.waves, cfg.toy.seed, cfg.toy.noise);
  if (truth) *truth = toy.waves;
  return std::move(toy.image);
}

Detection detect_stage(const ComplexField& spectrum, const PipelineConfig& cfg) {
  Detection d;
  d.log_spectrum = log_magnitude(spectrum);
  d.detected = detect_modes(d.log_spectrum, cfg.scale_space);
  d.modes = symmetrize_modes(d.detected, cfg.scale_space.min_separation);
  return d;
}

PartitionLabelMap partition_stage(const Detection& d, const PipelineConfig& cfg) {
  const FrequencyGrid g = grid_of(d.log_spectrum);
  PartitionLabelMap p = cfg.partition == "voronoi" ? voronoi_partition(d.modes, g)
                                                   : watershed_partition(d.log_spectrum, d.modes, cfg.watershed_sigma);
  const auto rep = validate_partition(p);
  if (!rep.valid()) throw NumericalError("partition is not a symmetric connected cover");
  return p;
}

MappingStage mapping_stage(const PartitionLabelMap& p, const WaveletKernel& kernel, const PipelineConfig& cfg) {
  MappingStage m;
  m.regions = region_masks(p);
  const bool one_d = p.grid().is_1d();
  if (one_d && cfg.mapper != "affine") throw ValidationError("mapper '" + cfg.mapper + "' needs a 2D grid");
  const double margin = kernel.compactly_supported ? 1.0 : cfg.mapping.unbounded_margin;

  std::vector<std::size_t> primary;
  for (std::size_t k = 0; k < m.regions.size(); ++k)
    if (m.regions[k].index >= 0) primary.push_back(k);
  std::vector<std::optional<Diffeomorphism>> fitted(m.regions.size());

  parallel_for(primary.size(), [&](std::size_t t) {
    const RegionMask& r = m.regions[primary[t]];
    const RegionMask& partner = r.index == 0 ? r : m.region(-r.index);
    if (!r.bounded || !partner.bounded || cfg.mapper == "affine") {
      Diffeomorphism a = affine_map_for_pair(r, partner, kernel.support, margin);
      if (cfg.mapper != "affine") a.meta.estimator = "affine-margin";
      a.meta.residual = static_cast<double>(mapping_mismatch(a, r, kernel.support));
      a.meta.affine_residual = a.meta.residual;
      fitted[primary[t]] = std::move(a);
      return;
    }
    if (cfg.mapper == "star") {
      try {
        Diffeomorphism s = star_shaped_map(r, kernel.support);
        s.meta.residual = static_cast<double>(mapping_mismatch(s, r, kernel.support));
        s.meta.affine_residual =
            static_cast<double>(mapping_mismatch(affine_map_for_region(r, kernel.support), r, kernel.support));
        fitted[primary[t]] = std::move(s);
        return;
      } catch (const ValidationError& e) {
        Diffeomorphism a = affine_map_for_region(r, kernel.support, margin);
        a.meta.estimator = "affine-fallback";
        a.meta.residual = static_cast<double>(mapping_mismatch(a, r, kernel.support));
        a.meta.affine_residual = a.meta.residual;
        a.meta.warnings.push_back(e.what());
        fitted[primary[t]] = std::move(a);
        return;
      }
    }
    fitted[primary[t]] = estimate_diffeomorphism_demons(r, kernel.support, cfg.mapping);
  });

  for (std::size_t k = 0; k < m.regions.size(); ++k) {
    const int label = m.regions[k].index;
    if (label >= 0) {
      m.maps.push_back(*fitted[k]);
      continue;
    }
    const Diffeomorphism* base = nullptr;
    for (std::size_t q = 0; q < m.regions.size(); ++q)
      if (m.regions[q].index == -label) base = &*fitted[q];
    if (!base) throw ValidationError("region " + std::to_string(label) + " has no partner");
    Diffeomorphism mirror = base->mirrored();
    mirror.meta = base->meta;
    mirror.meta.region = label;
    mirror.meta.residual = static_cast<double>(mapping_mismatch(mirror, m.regions[k], kernel.support));
    m.maps.push_back(std::move(mirror));
  }
  return m;
}

FilterBank filter_stage(const PartitionLabelMap& p, const MappingStage& m, const WaveletKernel& kernel) {
  const FrequencyGrid g = p.grid();
  std::vector<EmpiricalFilter> filters(m.regions.size());
  parallel_for(m.regions.size(),
               [&](std::size_t k) { filters[k] = build_filter(kernel, m.maps[k], g, m.regions[k].index); });
  FilterBank bank = make_bank(std::move(filters));
  bank.kernel = kernel.name;
  bank.compact = kernel.compactly_supported;
  bank.partition_hash = partition_hash(p);
  std::string mapper;
  for (const auto& map : m.maps)
    if (mapper.find(map.meta.estimator) == std::string::npos) mapper += (mapper.empty() ? "" : "+") + map.meta.estimator;
  bank.mapper = mapper;
  return bank;
}

std::vector<std::pair<int, double>> band_energies(const ComplexField& spectrum, const PartitionLabelMap& p) {
  std::vector<std::pair<int, double>> out;
  for (int l : p.label_set()) {
    if (l < 0) continue;
    SampleMask mask(p.width, p.height, 0);
    for (std::size_t k = 0; k < mask.size(); ++k)
      if (p.labels.data[k] == l || p.labels.data[k] == -l) mask.data[k] = 1;
    out.emplace_back(l, band_energy(spectrum, mask));
  }
  return out;
}

RunReport run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  std::string source = cfg.input;
  std::vector<PlantedWave> truth;
  RealImage img;
  try {
    img = load_input(cfg, &truth);
  } catch (const ValidationError& e) {
    const std::string msg = std::string("stage 'input': ") + e.what();
    if (!cfg.out.empty()) {
      RunReport rep;
      rep.status = "failed";
      rep.failed_stage = "input";
      rep.error = e.what();
      rep.config = cfg.to_json();
      fs::create_directories(cfg.out);
      std::ofstream(fs::path(cfg.out) / "FAILED") << msg << '\n';
      write_json(fs::path(cfg.out) / "report.json", report_to_json(rep));
    }
    throw ValidationError(msg);
  }
  if (source.empty()) source = "toy:" + std::to_string(cfg.toy.seed);
  if (!cfg.out.empty() && cfg.input.empty()) {
    json waves = json::array();
    for (const auto& w : truth)
      waves.push_back({{"offset", {w.di, w.dj}}, {"amplitude", w.amplitude}, {"phase", w.phase}});
    write_json(fs::path(cfg.out) / "toy_truth.json", {{"seed", cfg.toy.seed}, {"waves", waves}});
  }
  return run_pipeline(img, cfg, source);
}

RunReport run_pipeline(const RealImage& image, const PipelineConfig& cfg, const std::string& source) {
  cfg.validate();
  RunReport rep;
  rep.config = cfg.to_json();
  rep.width = image.width;
  rep.height = image.height;
  rep.source = source;
  const fs::path out = cfg.out;
  const bool write = !cfg.out.empty();
  const bool rasters = write && cfg.save_rasters;
  std::string stage = "input";
  auto t0 = std::chrono::steady_clock::now();
  auto lap = [&](const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    rep.timings.emplace_back(name, std::chrono::duration<double>(now - t0).count());
    t0 = now;
  };

  try {
    if (write) {
      fs::create_directories(out);
      fs::remove(out / "FAILED");
    }
    if (image.width < 2 || image.height < 1) throw ValidationError("image must be at least 2x1");
    require_finite(image, "input image");
    const FrequencyGrid grid = grid_of(image);
    const ComplexField spectrum = fft_forward(to_complex(image));
    if (rasters) write_ewt1(out / "input.ewt", image);

    stage = "detect";
    const Detection det = detect_stage(spectrum, cfg);
    rep.modes = det.modes;
    if (write) write_json(out / "modes.json", modes_to_json(det.modes));
    lap(stage);

    stage = "partition";
    PartitionLabelMap part = partition_stage(det, cfg);
    rep.partition_hash = partition_hash(part);
    rep.num_regions = part.num_regions();
    rep.partition_warnings = part.warnings;
    if (write) {
      json pj = partition_to_json(part);
      pj["method"] = cfg.partition;
      pj["hash"] = rep.partition_hash;
      write_json(out / "partition.json", pj);
    }
    if (rasters) {
      RealImage labels(part.width, part.height);
      for (std::size_t k = 0; k < labels.size(); ++k) labels.data[k] = part.labels.data[k];
      write_ewt1(out / "labels.ewt", labels);
    }
    lap(stage);

    stage = "map";
    const WaveletKernel kernel = pipeline_kernel(cfg, grid);
    const MappingStage maps = mapping_stage(part, kernel, cfg);
    for (std::size_t k = 0; k < maps.regions.size(); ++k) {
      RegionReport r{maps.regions[k].index, maps.regions[k].count, maps.regions[k].bounded, maps.maps[k].meta};
      for (const auto& w : r.meta.warnings) rep.warnings.push_back("region " + std::to_string(r.index) + ": " + w);
      rep.regions.push_back(std::move(r));
    }
    if (write) {
      json mj = json::array();
      for (const auto& m : maps.maps) mj.push_back(map_to_json(m));
      write_json(out / "maps.json", mj);
    }
    lap(stage);

    stage = "filters";
    const FilterBank plain = filter_stage(part, maps, kernel);
    const FilterBank bank = build_symmetric_bank(plain);
    if (rasters) save_bank(out / "filters", bank);
    lap(stage);

    stage = "frame";
    rep.frame = frame_bounds(bank);
    if (cfg.frame.parseval)
      rep.frame.parseval = discrete_parseval_check(bank, 1.0, cfg.frame.parseval_radius,
                                                   &rep.frame.parseval_approximate, &rep.frame.warnings);
    if (cfg.frame.discrete) rep.frame.discrete = discrete_frame_bounds(bank, 1.0, cfg.frame.discrete_radius);
    if (!(rep.frame.A > 0.0)) rep.warnings.push_back("filter bank does not cover every frequency sample");
    lap(stage);

    stage = "transform";
    const CoefficientSet coeffs = forward_spectrum(spectrum, bank);
    rep.energies = band_energies(spectrum, part);
    rep.total_energy = spectral_energy(spectrum);
    if (rasters) save_coefficients(out / "coefficients", coeffs, bank);
    lap(stage);

    stage = "reconstruct";
    const DualFilterBank duals = dual_bank(bank, cfg.dual_floor);
    const Reconstruction rec = reconstruct(coeffs, duals);
    rep.mse = mse(rec.image, image);
    rep.imag_residual = rec.imag_residual;
    rep.zero_coverage = duals.zero_count;
    rep.gap_energy = band_energy(spectrum, duals.zero_coverage) / static_cast<double>(grid.size());
    if (rasters) write_ewt1(out / "reconstruction.ewt", rec.image);
    lap(stage);

    if (write && cfg.figures) {
      stage = "figures";
      const fs::path fig = out / "figures";
      write_png(fig / "partition_overlay.png", partition_overlay(det.log_spectrum, part));
      json panels = json::array();
      for (const auto& [n, e] : rep.energies) {
        const std::string file = "band_" + std::to_string(n) + ".png";
        write_png(fig / file, band_panel(wavelet_spectrum(coeffs, n), n, e));
        panels.push_back({{"index", n}, {"file", file}, {"E", e}, {"label", energy_label(n, e)}});
      }
      json pre = json::array();
      for (std::size_t k = 0; k < maps.regions.size(); ++k) {
        const int n = maps.regions[k].index;
        if (n < 0) continue;
        const std::string file = "preimage_" + std::to_string(n) + ".png";
        write_png(fig / file, preimage_comparison(maps.regions[k], maps.maps[k], kernel.support));
        pre.push_back({{"index", n}, {"file", file}});
      }
      std::size_t boundary = 0;
      for (auto b : part.boundary.data) boundary += b ? 1 : 0;
      write_json(fig / "figures.json", {{"overlay", "partition_overlay.png"},
                                        {"boundary_samples", boundary},
                                        {"panels", panels},
                                        {"preimages", pre}});
      lap(stage);
    }
  } catch (const std::exception& e) {
    rep.status = "failed";
    rep.failed_stage = stage;
    rep.error = e.what();
    const std::string msg = "stage '" + stage + "': " + e.what();
    if (write) {
      try {
        std::ofstream(out / "FAILED") << msg << '\n';
        write_json(out / "report.json", report_to_json(rep));
      } catch (...) {
      }
    }
    if (dynamic_cast<const ValidationError*>(&e)) throw ValidationError(msg);
    throw NumericalError(msg);
  }
  if (write) write_json(out / "report.json", report_to_json(rep));
  return rep;
}

json report_to_json(const RunReport& r, bool include_timings) {
  json j;
  j["status"] = r.status;
  if (r.status != "ok") j["failure"] = {{"stage", r.failed_stage}, {"error", r.error}};
  j["config"] = r.config;
  j["image"] = {{"width", r.width}, {"height", r.height}, {"source", r.source}};
  j["modes"] = {{"count", r.modes.modes.size()}, {"pairs", r.modes.non_dc_count() / 2},
                {"detected", modes_to_json(r.modes)}};
  j["partition"] = {{"hash", r.partition_hash}, {"regions", r.num_regions}, {"warnings", r.partition_warnings}};
  json regions = json::array();
  for (const auto& reg : r.regions) regions.push_back(region_json(reg));
  j["regions"] = regions;
  json energies = json::array();
  double sum = 0.0;
  for (const auto& [n, e] : r.energies) {
    energies.push_back({{"index", n}, {"E", e}});
    sum += e;
  }
  j["energies"] = {{"bands", energies}, {"sum", sum}, {"total", r.total_energy}};
  j["frame"] = frame_report_to_json(r.frame);
  j["reconstruction"] = {{"mse", r.mse},
                         {"imag_residual", r.imag_residual},
                         {"zero_coverage", r.zero_coverage},
                         {"gap_energy", r.gap_energy}};
  j["warnings"] = r.warnings;
  if (include_timings) {
    json t = json::object();
    double total = 0.0;
    for (const auto& [name, s] : r.timings) {
      t[name] = s;
      total += s;
    }
    t["total"] = total;
    j["timings"] = t;
  }
  return j;
}

std::string bank_fingerprint(const FilterBank& bank) {
  Fnv h;
  h.bytes(static_cast<std::uint32_t>(bank.width), 4);
  h.bytes(static_cast<std::uint32_t>(bank.height), 4);
  for (std::size_t n = 0; n < bank.size(); ++n) {
    h.bytes(static_cast<std::uint32_t>(bank.indices[n]), 4);
    for (const auto& v : bank.filters[n].data) {
      h.bytes(std::bit_cast<std::uint64_t>(v.real()), 8);
      h.bytes(std::bit_cast<std::uint64_t>(v.imag()), 8);
    }
  }
  return hex64(h.value());
}

void save_bank(const fs::path& dir, const FilterBank& bank) {
  fs::create_directories(dir);
  json files = json::array();
  for (std::size_t n = 0; n < bank.size(); ++n) {
    write_ewt1(dir / filter_file(bank.indices[n]), bank.filters[n]);
    files.push_back(filter_file(bank.indices[n]));
  }
  write_json(dir / "manifest.json", {{"kind", bank.kind == BankKind::Symmetric ? "symmetric" : "plain"},
                                     {"kernel", bank.kernel},
                                     {"mapper", bank.mapper},
                                     {"partition_hash", bank.partition_hash},
                                     {"compact", bank.compact},
                                     {"width", bank.width},
                                     {"height", bank.height},
                                     {"indices", bank.indices},
                                     {"files", files},
                                     {"fingerprint", bank_fingerprint(bank)}});
}

FilterBank load_bank(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  try {
    const auto indices = m.at("indices").get<std::vector<int>>();
    const auto files = m.at("files").get<std::vector<std::string>>();
    if (indices.size() != files.size()) throw ValidationError("manifest lists mismatched indices and files");
    std::vector<EmpiricalFilter> filters;
    for (std::size_t k = 0; k < files.size(); ++k)
      filters.push_back({indices[k], read_ewt1_complex(dir / files[k]), "file", {}});
    FilterBank bank = make_bank(std::move(filters), m.at("kind") == "symmetric" ? BankKind::Symmetric : BankKind::Plain);
    bank.kernel = m.at("kernel").get<std::string>();
    bank.mapper = m.at("mapper").get<std::string>();
    bank.partition_hash = m.at("partition_hash").get<std::string>();
    bank.compact = m.at("compact").get<bool>();
    if (m.contains("fingerprint") && m["fingerprint"] != bank_fingerprint(bank))
      throw ValidationError("filter rasters do not match the manifest fingerprint");
    return bank;
  } catch (const json::exception& e) {
    throw ValidationError((dir / "manifest.json").string() + ": " + e.what());
  }
}

void save_coefficients(const fs::path& dir, const CoefficientSet& c, const FilterBank& bank) {
  if (c.lineage != bank.lineage) throw ValidationError("coefficients were not computed with this bank");
  fs::create_directories(dir);
  json files = json::array();
  for (std::size_t n = 0; n < c.bands.size(); ++n) {
    write_ewt1(dir / band_file(c.indices[n]), c.bands[n]);
    files.push_back(band_file(c.indices[n]));
  }
  write_json(dir / "manifest.json", {{"indices", c.indices},
                                     {"files", files},
                                     {"width", c.width},
                                     {"height", c.height},
                                     {"step", c.step},
                                     {"bank_fingerprint", bank_fingerprint(bank)}});
}

CoefficientSet load_coefficients(const fs::path& dir, const FilterBank& bank) {
  const json m = read_json(dir / "manifest.json");
  try {
    if (m.at("bank_fingerprint").get<std::string>() != bank_fingerprint(bank))
      throw ValidationError("coefficients were computed with a different filter bank");
    CoefficientSet c;
    c.indices = m.at("indices").get<std::vector<int>>();
    c.width = m.at("width").get<int>();
    c.height = m.at("height").get<int>();
    c.step = m.at("step").get<double>();
    const auto files = m.at("files").get<std::vector<std::string>>();
    if (files.size() != c.indices.size()) throw ValidationError("manifest lists mismatched indices and files");
    for (const auto& f : files) {
      c.bands.push_back(read_ewt1_complex(dir / f));
      if (!c.bands.back().same_shape(c.width, c.height)) throw ValidationError(f + " has the wrong size");
    }
    c.lineage = bank.lineage;
    return c;
  } catch (const json::exception& e) {
    throw ValidationError((dir / "manifest.json").string() + ": " + e.what());
  }
}

}  // namespace ewt

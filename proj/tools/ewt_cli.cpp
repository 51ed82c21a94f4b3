// Command-line front end: one subcommand per pipeline stage plus `run` and `toy`.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "ewt/figures.hpp"
#include "ewt/io.hpp"
#include "ewt/pipeline.hpp"

using namespace ewt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string input;
  std::optional<std::string> kernel, partition, mapper, out;
  std::optional<double> s0, dual_floor;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool with_input = true) {
  if (with_input) cmd->add_option("input", c.input, "Grayscale image (PGM, PNG, PFM, EWT1); omit for the toy image");
  cmd->add_option("--config", c.config, "JSON pipeline config; flags override it");
  cmd->add_option("--kernel", c.kernel, "gabor | shannon");
  cmd->add_option("--partition", c.partition, "voronoi | watershed");
  cmd->add_option("--mapper", c.mapper, "affine | star | demons");
  cmd->add_option("--s0", c.s0, "Scale-space lifetime threshold");
  cmd->add_option("--dual-floor", c.dual_floor, "Relative floor of the dual denominator");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--seed", c.seed, "Toy image seed");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg;
  if (!c.config.empty()) cfg = PipelineConfig::from_json(read_json(c.config));
  if (!c.input.empty()) cfg.input = c.input;
  if (c.kernel) cfg.kernel = *c.kernel;
  if (c.partition) cfg.partition = *c.partition;
  if (c.mapper) cfg.mapper = *c.mapper;
  if (c.s0) cfg.scale_space.s0 = *c.s0;
  if (c.dual_floor) cfg.dual_floor = *c.dual_floor;
  if (c.out) cfg.out = *c.out;
  if (c.seed) cfg.toy.seed = *c.seed;
  if (cfg.out.empty()) cfg.out = "ewt_out";
  cfg.validate();
  return cfg;
}

struct Upstream {
  RealImage image;
  ComplexField spectrum;
  Detection detection;
  std::optional<PartitionLabelMap> partition;
  std::optional<WaveletKernel> kernel;
  std::optional<MappingStage> maps;
};

enum class Stage { Detect, Partition, Map };

Upstream compute(const PipelineConfig& cfg, Stage last) {
  Upstream u;
  u.image = load_input(cfg);
  u.spectrum = fft_forward(to_complex(u.image));
  u.detection = detect_stage(u.spectrum, cfg);
  if (last == Stage::Detect) return u;
  u.partition = partition_stage(u.detection, cfg);
  if (last == Stage::Partition) return u;
  u.kernel = pipeline_kernel(cfg, grid_of(u.image));
  u.maps = mapping_stage(*u.partition, *u.kernel, cfg);
  return u;
}

FilterBank bank_from(const PipelineConfig& cfg, const Upstream& u) {
  return build_symmetric_bank(filter_stage(*u.partition, *u.maps, *u.kernel));
}

void write_partition(const fs::path& out, const Upstream& u, const PipelineConfig& cfg) {
  json pj = partition_to_json(*u.partition);
  pj["method"] = cfg.partition;
  pj["hash"] = partition_hash(*u.partition);
  write_json(out / "partition.json", pj);
  RealImage labels(u.partition->width, u.partition->height);
  for (std::size_t k = 0; k < labels.size(); ++k) labels.data[k] = u.partition->labels.data[k];
  write_ewt1(out / "labels.ewt", labels);
  write_png(out / "partition_overlay.png", partition_overlay(u.detection.log_spectrum, *u.partition));
}

int cmd_toy(int width, int height, int waves, std::uint64_t seed, double noise, const std::string& out) {
  auto toy = make_toy_image(width, height, waves, seed, noise);
  const fs::path dir = out;
  write_ewt1(dir / "toy.ewt", toy.image);
  write_pgm(dir / "toy.pgm", toy.image, 16);
  json list = json::array();
  for (const auto& w : toy.waves) list.push_back({{"offset", {w.di, w.dj}}, {"amplitude", w.amplitude}, {"phase", w.phase}});
  write_json(dir / "toy_truth.json",
             {{"width", width}, {"height", height}, {"seed", seed}, {"noise", noise}, {"waves", list}});
  std::cout << "wrote " << (dir / "toy.ewt").string() << " with " << toy.waves.size() << " waves\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical wavelet transforms on 2D images"};
  app.require_subcommand(1);

  Common common;
  auto* detect = app.add_subcommand("detect", "Detect spectral modes");
  auto* partition = app.add_subcommand("partition", "Partition the frequency plane");
  auto* map = app.add_subcommand("map", "Fit a diffeomorphism per region");
  auto* filters = app.add_subcommand("filters", "Build the symmetric filter bank");
  auto* transform = app.add_subcommand("transform", "Forward transform");
  auto* reconstruct = app.add_subcommand("reconstruct", "Inverse transform from saved coefficients");
  auto* frame = app.add_subcommand("frame", "Frame bounds and Parseval diagnostics");
  auto* run = app.add_subcommand("run", "Full pipeline with report and figures");
  auto* toy = app.add_subcommand("toy", "Generate the synthetic test image");
  for (auto* c : {detect, partition, map, filters, transform, frame, run}) add_common(c, common);
  add_common(reconstruct, common, false);

  std::string filters_dir, coeff_dir, reference;
  transform->add_option("--filters", filters_dir, "Saved filter bank directory (built from the input if omitted)");
  frame->add_option("--filters", filters_dir, "Saved filter bank directory (built from the input if omitted)");
  reconstruct->add_option("--filters", filters_dir, "Saved filter bank directory")->required();
  reconstruct->add_option("--coefficients", coeff_dir, "Saved coefficient directory")->required();
  reconstruct->add_option("--reference", reference, "Image to compare against");
  int parseval_radius = 3;
  frame->add_option("--radius", parseval_radius, "Shift radius for the discrete checks");

  int toy_w = 256, toy_h = 256, toy_waves = 5;
  std::uint64_t toy_seed = 7;
  double toy_noise = 0.0;
  std::string toy_out = "ewt_out";
  toy->add_option("--width", toy_w, "Image width");
  toy->add_option("--height", toy_h, "Image height (1 for a 1D signal)");
  toy->add_option("--waves", toy_waves, "Number of planted waves");
  toy->add_option("--seed", toy_seed, "Generator seed");
  toy->add_option("--noise", toy_noise, "White noise standard deviation");
  toy->add_option("--out", toy_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (toy->parsed()) return cmd_toy(toy_w, toy_h, toy_waves, toy_seed, toy_noise, toy_out);

    const PipelineConfig cfg = resolve(common);
    const fs::path out = cfg.out;
    fs::create_directories(out);

    if (run->parsed()) {
      const RunReport r = run_pipeline(cfg);
      std::cout << "modes " << r.modes.modes.size() << ", regions " << r.num_regions << ", mse " << r.mse
                << ", frame A " << r.frame.A << " B " << r.frame.B << "\n"
                << "report: " << (out / "report.json").string() << "\n";
      return 0;
    }
    if (detect->parsed()) {
      const auto u = compute(cfg, Stage::Detect);
      write_json(out / "modes.json", modes_to_json(u.detection.modes));
      write_png(out / "log_spectrum.png", u.detection.log_spectrum);
      std::cout << u.detection.modes.modes.size() << " modes (" << u.detection.modes.non_dc_count() / 2
                << " pairs + DC)\n";
      return 0;
    }
    if (partition->parsed()) {
      const auto u = compute(cfg, Stage::Partition);
      write_json(out / "modes.json", modes_to_json(u.detection.modes));
      write_partition(out, u, cfg);
      std::cout << u.partition->num_regions() << " regions\n";
      return 0;
    }
    if (map->parsed()) {
      const auto u = compute(cfg, Stage::Map);
      write_partition(out, u, cfg);
      json mj = json::array();
      for (const auto& m : u.maps->maps) mj.push_back(map_to_json(m));
      write_json(out / "maps.json", mj);
      for (std::size_t k = 0; k < u.maps->regions.size(); ++k) {
        const auto& m = u.maps->maps[k];
        std::cout << "region " << u.maps->regions[k].index << ": " << m.meta.estimator << ", mismatch "
                  << m.meta.residual << "\n";
      }
      return 0;
    }
    if (filters->parsed()) {
      const auto u = compute(cfg, Stage::Map);
      const FilterBank bank = bank_from(cfg, u);
      save_bank(out / "filters", bank);
      std::cout << bank.size() << " filters in " << (out / "filters").string() << "\n";
      return 0;
    }
    if (transform->parsed()) {
      const RealImage img = load_input(cfg);
      const FilterBank bank = filters_dir.empty() ? bank_from(cfg, compute(cfg, Stage::Map)) : load_bank(filters_dir);
      const CoefficientSet c = ewt::forward(img, bank);
      if (filters_dir.empty()) save_bank(out / "filters", bank);
      save_coefficients(out / "coefficients", c, bank);
      std::cout << c.bands.size() << " bands in " << (out / "coefficients").string() << "\n";
      return 0;
    }
    if (reconstruct->parsed()) {
      const FilterBank bank = load_bank(filters_dir);
      const CoefficientSet c = load_coefficients(coeff_dir, bank);
      const DualFilterBank d = dual_bank(bank, cfg.dual_floor);
      const Reconstruction r = ewt::reconstruct(c, d);
      write_ewt1(out / "reconstruction.ewt", r.image);
      write_pgm(out / "reconstruction.pgm", r.image, 16);
      json info{{"imag_residual", r.imag_residual}, {"zero_coverage", d.zero_count}, {"floor", d.floor}};
      if (!reference.empty()) info["mse"] = mse(r.image, read_image(reference));
      write_json(out / "reconstruction.json", info);
      std::cout << info.dump() << "\n";
      return 0;
    }
    if (frame->parsed()) {
      const FilterBank bank = filters_dir.empty() ? bank_from(cfg, compute(cfg, Stage::Map)) : load_bank(filters_dir);
      FrameReport rep = frame_bounds(bank);
      rep.parseval = discrete_parseval_check(bank, 1.0, parseval_radius, &rep.parseval_approximate, &rep.warnings);
      rep.discrete = discrete_frame_bounds(bank, 1.0, std::max(1, parseval_radius));
      write_json(out / "frame.json", frame_report_to_json(rep));
      std::cout << "A " << rep.A << " B " << rep.B << (rep.tight ? " (tight)" : "") << "\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

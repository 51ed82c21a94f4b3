#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewt/demons.hpp"
#include "ewt/filterbank.hpp"
#include "ewt/modes.hpp"
#include "ewt/partition.hpp"
#include "ewt/toy.hpp"
#include "ewt/transform.hpp"

namespace ewt {

struct ToySettings {
  int width = 256;
  int height = 256;
  int waves = 5;
  std::uint64_t seed = 7;
  double noise = 0.0;
};

struct FrameSettings {
  bool parseval = true;
  int parseval_radius = 3;
  bool discrete = true;
  int discrete_radius = 3;
};

struct PipelineConfig {
  std::string input;  ///< image path; empty means the generated toy image
  ToySettings toy;
  std::string kernel = "gabor";
  std::string partition = "voronoi";
  std::string mapper = "demons";
  ScaleSpaceParams scale_space;
  MappingFitParams mapping;
  double watershed_sigma = 2.0;
  double dual_floor = 1e-12;
  std::string out;  ///< artifact directory; empty writes nothing
  bool figures = true;
  bool save_rasters = true;
  FrameSettings frame;

  void validate() const;
  /// Unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Detection {
  RealImage log_spectrum;
  ModeSet detected;
  ModeSet modes;  ///< symmetrized
};

struct MappingStage {
  std::vector<RegionMask> regions;  ///< label_set order
  std::vector<Diffeomorphism> maps;  ///< one per region; negative labels mirror their partner
  const Diffeomorphism& map(int label) const;
  const RegionMask& region(int label) const;
};

struct RegionReport {
  int index = 0;
  std::size_t count = 0;
  bool bounded = false;
  MapMetadata meta;
};

struct RunReport {
  std::string status = "ok";
  std::string failed_stage;
  std::string error;
  nlohmann::json config;
  int width = 0;
  int height = 0;
  std::string source;
  ModeSet modes;
  std::string partition_hash;
  int num_regions = 0;
  std::vector<std::string> partition_warnings;
  std::vector<RegionReport> regions;
  std::vector<std::pair<int, double>> energies;  ///< E_n over Omega_n and Omega_-n
  double total_energy = 0.0;
  FrameReport frame;
  double mse = 0.0;
  double imag_residual = 0.0;
  std::size_t zero_coverage = 0;
  double gap_energy = 0.0;  ///< spectral energy on the zero-coverage mask, per sample
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> warnings;
};

WaveletKernel pipeline_kernel(const PipelineConfig& cfg, const FrequencyGrid& grid);
/// Reads cfg.input, or generates the toy image (waves written to `truth`).
RealImage load_input(const PipelineConfig& cfg, std::vector<PlantedWave>* truth = nullptr);

Detection detect_stage(const ComplexField& spectrum, const PipelineConfig& cfg);
PartitionLabelMap partition_stage(const Detection& d, const PipelineConfig& cfg);
MappingStage mapping_stage(const PartitionLabelMap& p, const WaveletKernel& kernel, const PipelineConfig& cfg);
/// Plain bank over every label of the partition.
FilterBank filter_stage(const PartitionLabelMap& p, const MappingStage& m, const WaveletKernel& kernel);

/// E_n per symmetric index n >= 0 over Omega_n and Omega_-n.
std::vector<std::pair<int, double>> band_energies(const ComplexField& spectrum, const PartitionLabelMap& p);

/// Runs every stage and writes artifacts when cfg.out is set. On failure a
/// FAILED marker and a partial report are written, then the error is
/// rethrown with the stage name in its message.
RunReport run_pipeline(const PipelineConfig& cfg);
RunReport run_pipeline(const RealImage& image, const PipelineConfig& cfg, const std::string& source = "memory");

nlohmann::json report_to_json(const RunReport& r, bool include_timings = true);

/// Digest of a bank's indices and samples, as 16 hex digits.
std::string bank_fingerprint(const FilterBank& bank);

/// One EWT1 complex raster per filter plus manifest.json.
void save_bank(const std::filesystem::path& dir, const FilterBank& bank);
FilterBank load_bank(const std::filesystem::path& dir);
void save_coefficients(const std::filesystem::path& dir, const CoefficientSet& c, const FilterBank& bank);
/// Checks the manifest against the bank's fingerprint and adopts its lineage.
CoefficientSet load_coefficients(const std::filesystem::path& dir, const FilterBank& bank);

}  // namespace ewt

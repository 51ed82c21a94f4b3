#pragma once

#include <climits>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewt/modes.hpp"
#include "ewt/spectral.hpp"

namespace ewt {

inline constexpr int unlabeled = INT_MIN;

struct Seed {
  int label = 0;
  int di = 0;
  int dj = 0;
};

/// Signed region label per frequency sample; -n marks the mirror of region n.
struct PartitionLabelMap {
  int width = 0;
  int height = 0;
  Field<int> labels;
  SampleMask boundary;
  std::vector<Seed> seeds;
  bool symmetric = true;
  std::vector<std::string> warnings;

  FrequencyGrid grid() const { return {width, height}; }
  int operator()(int i, int j) const { return labels(i, j); }
  /// Distinct labels ordered 0, 1, -1, 2, -2, ...
  std::vector<int> label_set() const;
  int num_regions() const { return static_cast<int>(label_set().size()); }
};

struct ValidationReport {
  bool covering = true;
  bool connected = true;
  bool symmetric = true;
  std::vector<std::pair<int, int>> unlabeled_samples;
  std::vector<std::pair<int, int>> disconnected_samples;
  std::vector<std::pair<int, int>> asymmetric_samples;

  bool valid() const { return covering && connected && symmetric; }
};

struct RegionMask {
  int index = 0;
  SampleMask mask;
  bool bounded = false;
  Vec2 centroid;
  std::size_t count = 0;
};

/// Labels for a symmetrized mode set: DC gets 0, half-plane modes 1..K by
/// descending amplitude, mirrors the negated label.
std::vector<Seed> label_seeds(const ModeSet& modes);

PartitionLabelMap voronoi_partition(const ModeSet& modes, const FrequencyGrid& grid);
PartitionLabelMap watershed_partition(const RealImage& log_spec, const ModeSet& modes, double smoothing_sigma = 2.0);

/// Fills p.boundary: samples with a 4-neighbour of another label.
void compute_boundary(PartitionLabelMap& p);

ValidationReport validate_partition(const PartitionLabelMap& p);
std::vector<RegionMask> region_masks(const PartitionLabelMap& p);

nlohmann::json partition_to_json(const PartitionLabelMap& p);
/// Rebuilds a label map from its JSON sidecar.
PartitionLabelMap partition_from_json(const nlohmann::json& doc);

}  // namespace ewt

#pragma once

#include <vector>

#include <json.hpp>

#include "ewt/spectral.hpp"

namespace ewt {

struct ScaleSpaceParams {
  double s0 = 0.8;           ///< lifetime threshold
  double scale_step = 0.1;   ///< sigma increment per level, in samples
  int num_levels = 32;
  int min_separation = 2;    ///< samples
  /// A maximum counts at a level only if it rises above the level median by
  /// more than max(significance * robust_sigma, relative_floor * (max - median)).
  double significance = 5.0;
  double relative_floor = 0.02;

  void validate() const;
};

/// A detected mode, stored as an integer offset from the zero-frequency sample.
struct Mode {
  int di = 0;
  int dj = 0;
  double persistence = 0.0;
  double amplitude = 0.0;

  bool is_dc() const { return di == 0 && dj == 0; }
};

struct ModeSet {
  int width = 0;
  int height = 0;
  std::vector<Mode> modes;
  bool symmetric = false;

  bool contains_dc() const;
  Vec2 xi(const Mode& m) const {
    return {static_cast<double>(m.di) / width, static_cast<double>(m.dj) / height};
  }
  const Mode* find(int di, int dj) const;
  /// Number of modes other than DC.
  int non_dc_count() const;
};

ModeSet detect_modes(const RealImage& log_spec, const ScaleSpaceParams& params = {});

/// Adds missing mirror modes, merges near-mirror pairs, forces DC in.
ModeSet symmetrize_modes(const ModeSet& modes, int min_separation = 2);

nlohmann::json modes_to_json(const ModeSet& modes);
ModeSet modes_from_json(const nlohmann::json& doc);

}  // namespace ewt

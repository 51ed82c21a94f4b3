#include "ewt/partition.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "ewt/gaussian.hpp"

namespace ewt {

namespace {

// Squared xi distance scaled by (W H)^2 so that it stays an exact integer.
long long scaled_dist2(const FrequencyGrid& g, int di, int dj, const Seed& s) {
  const long long dx = di - s.di, dy = dj - s.dj;
  const long long w = g.width(), h = g.height();
  return dx * dx * h * h + dy * dy * w * w;
}

// Ordering of labels when distances tie: smaller |n| first, then + before -.
bool label_before(int a, int b) {
  if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
  return a > b;
}

PartitionLabelMap empty_map(const FrequencyGrid& g, std::vector<Seed> seeds) {
  PartitionLabelMap p;
  p.width = g.width();
  p.height = g.height();
  p.labels = Field<int>(g.width(), g.height(), unlabeled);
  p.seeds = std::move(seeds);
  return p;
}

}  // namespace

std::vector<int> PartitionLabelMap::label_set() const {
  std::set<int> s(labels.data.begin(), labels.data.end());
  s.erase(unlabeled);
  std::vector<int> out(s.begin(), s.end());
  std::sort(out.begin(), out.end(), label_before);
  return out;
}

std::vector<Seed> label_seeds(const ModeSet& modes) {
  if (modes.modes.empty()) throw ValidationError("empty mode set");
  const FrequencyGrid g(modes.width, modes.height);
  std::set<std::pair<int, int>> seen;
  for (const auto& m : modes.modes) {
    if (!g.index_of_offset(m.di, m.dj)) throw ValidationError("mode outside the frequency grid");
    if (!seen.insert({m.di, m.dj}).second) throw ValidationError("duplicate mode seeds");
  }
  if (!seen.count({0, 0})) throw ValidationError("mode set lacks the zero frequency");

  std::vector<Mode> primary;
  for (const auto& m : modes.modes) {
    if (m.is_dc()) continue;
    const bool has_mirror = g.index_of_offset(-m.di, -m.dj).has_value();
    if (has_mirror && !seen.count({-m.di, -m.dj}))
      throw ValidationError("mode set is not symmetric; symmetrize it first");
    if (!has_mirror || m.dj > 0 || (m.dj == 0 && m.di > 0)) primary.push_back(m);
  }
  std::stable_sort(primary.begin(), primary.end(), [](const Mode& a, const Mode& b) {
    if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
    if (a.dj != b.dj) return a.dj < b.dj;
    return a.di < b.di;
  });
  std::vector<Seed> seeds{{0, 0, 0}};
  int n = 1;
  for (const auto& m : primary) {
    seeds.push_back({n, m.di, m.dj});
    if (g.index_of_offset(-m.di, -m.dj)) seeds.push_back({-n, -m.di, -m.dj});
    ++n;
  }
  return seeds;
}

PartitionLabelMap voronoi_partition(const ModeSet& modes, const FrequencyGrid& grid) {
  if (modes.width != grid.width() || modes.height != grid.height())
    throw ValidationError("mode set and grid dimensions differ");
  PartitionLabelMap p = empty_map(grid, label_seeds(modes));
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i) {
      const int di = grid.offset_i(i), dj = grid.offset_j(j);
      long long best = -1;
      int lab = unlabeled;
      for (const auto& s : p.seeds) {
        const long long d = scaled_dist2(grid, di, dj, s);
        if (best < 0 || d < best || (d == best && label_before(s.label, lab))) {
          best = d;
          lab = s.label;
        }
      }
      p.labels(i, j) = lab;
    }
  compute_boundary(p);
  return p;
}

PartitionLabelMap watershed_partition(const RealImage& log_spec, const ModeSet& modes, double smoothing_sigma) {
  if (!(smoothing_sigma >= 0)) throw ValidationError("smoothing sigma must be non-negative");
  require_finite(log_spec, "log spectrum");
  if (modes.width != log_spec.width || modes.height != log_spec.height)
    throw ValidationError("mode set and spectrum dimensions differ");
  const FrequencyGrid grid = grid_of(log_spec);
  PartitionLabelMap p = empty_map(grid, label_seeds(modes));
  const RealImage smooth = gaussian_smooth(log_spec, smoothing_sigma, Boundary::Periodic);

  using Entry = std::tuple<double, long long, int, int, long long, int, int, int>;
  // (flood level, distance to seed, |label|, sign, sequence, i, j, label)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  long long seq = 0;
  auto seed_for = [&](int label) -> const Seed& {
    for (const auto& s : p.seeds)
      if (s.label == label) return s;
    throw ValidationError("unknown label");
  };

  auto push_neighbours = [&](int i, int j, int label) {
    const Seed& s = seed_for(label);
    constexpr int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& o : off) {
      const int ni = i + o[0], nj = j + o[1];
      if (ni < 0 || nj < 0 || ni >= grid.width() || nj >= grid.height()) continue;
      if (p.labels(ni, nj) != unlabeled) continue;
      const long long d = scaled_dist2(grid, grid.offset_i(ni), grid.offset_j(nj), s);
      queue.emplace(-smooth(ni, nj), d, std::abs(label), label >= 0 ? 0 : 1, seq++, ni, nj, label);
    }
  };
  auto assign = [&](int i, int j, int label) {
    p.labels(i, j) = label;
    push_neighbours(i, j, label);
    if (auto m = grid.mirror(i, j); m && p.labels(m->first, m->second) == unlabeled) {
      p.labels(m->first, m->second) = -label;
      push_neighbours(m->first, m->second, -label);
    }
  };

  for (const auto& s : p.seeds) {
    const auto idx = grid.index_of_offset(s.di, s.dj);
    bool peak = true;
    for (int dj = -1; dj <= 1 && peak; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int ni = idx->first + di, nj = idx->second + dj;
        if ((!di && !dj) || ni < 0 || nj < 0 || ni >= grid.width() || nj >= grid.height()) continue;
        if (smooth(ni, nj) > smooth(idx->first, idx->second)) {
          peak = false;
          break;
        }
      }
    if (!peak)
      p.warnings.push_back("seed " + std::to_string(s.label) + " is not a local maximum of the smoothed spectrum");
    p.labels(idx->first, idx->second) = s.label;
  }
  for (const auto& s : p.seeds) {
    const auto idx = grid.index_of_offset(s.di, s.dj);
    push_neighbours(idx->first, idx->second, s.label);
  }
  while (!queue.empty()) {
    const auto [level, d, a, sg, sq, i, j, label] = queue.top();
    queue.pop();
    if (p.labels(i, j) != unlabeled) continue;
    assign(i, j, label);
  }
  compute_boundary(p);
  return p;
}

void compute_boundary(PartitionLabelMap& p) {
  p.boundary = SampleMask(p.width, p.height, 0);
  for (int j = 0; j < p.height; ++j)
    for (int i = 0; i < p.width; ++i) {
      const int l = p.labels(i, j);
      if ((i + 1 < p.width && p.labels(i + 1, j) != l) || (i > 0 && p.labels(i - 1, j) != l) ||
          (j + 1 < p.height && p.labels(i, j + 1) != l) || (j > 0 && p.labels(i, j - 1) != l))
        p.boundary(i, j) = 1;
    }
}

ValidationReport validate_partition(const PartitionLabelMap& p) {
  ValidationReport r;
  const FrequencyGrid grid = p.grid();
  for (int j = 0; j < p.height; ++j)
    for (int i = 0; i < p.width; ++i)
      if (p.labels(i, j) == unlabeled) r.unlabeled_samples.emplace_back(i, j);
  r.covering = r.unlabeled_samples.empty();

  // connected components per label; everything outside the largest one is reported
  Field<int> comp(p.width, p.height, -1);
  std::vector<std::size_t> comp_size;
  std::vector<int> comp_label;
  std::vector<std::pair<int, int>> stack;
  for (int j = 0; j < p.height; ++j)
    for (int i = 0; i < p.width; ++i) {
      if (comp(i, j) >= 0 || p.labels(i, j) == unlabeled) continue;
      const int id = static_cast<int>(comp_size.size());
      const int l = p.labels(i, j);
      comp_size.push_back(0);
      comp_label.push_back(l);
      stack.assign(1, {i, j});
      comp(i, j) = id;
      while (!stack.empty()) {
        auto [ci, cj] = stack.back();
        stack.pop_back();
        ++comp_size[static_cast<std::size_t>(id)];
        constexpr int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& o : off) {
          const int ni = ci + o[0], nj = cj + o[1];
          if (ni < 0 || nj < 0 || ni >= p.width || nj >= p.height) continue;
          if (comp(ni, nj) >= 0 || p.labels(ni, nj) != l) continue;
          comp(ni, nj) = id;
          stack.emplace_back(ni, nj);
        }
      }
    }
  std::map<int, int> main_comp;
  for (std::size_t c = 0; c < comp_size.size(); ++c) {
    auto it = main_comp.find(comp_label[c]);
    if (it == main_comp.end() || comp_size[c] > comp_size[static_cast<std::size_t>(it->second)])
      main_comp[comp_label[c]] = static_cast<int>(c);
  }
  for (int j = 0; j < p.height; ++j)
    for (int i = 0; i < p.width; ++i) {
      if (comp(i, j) < 0) continue;
      if (main_comp[p.labels(i, j)] != comp(i, j)) r.disconnected_samples.emplace_back(i, j);
    }
  r.connected = r.disconnected_samples.empty();

  if (p.symmetric) {
    for (int j = 0; j < p.height; ++j)
      for (int i = 0; i < p.width; ++i) {
        const auto m = grid.mirror(i, j);
        if (!m) continue;
        const int a = p.labels(i, j), b = p.labels(m->first, m->second);
        if (a == unlabeled || b == unlabeled) continue;
        if (b != -a) r.asymmetric_samples.emplace_back(i, j);
      }
    r.symmetric = r.asymmetric_samples.empty();
  }
  return r;
}

std::vector<RegionMask> region_masks(const PartitionLabelMap& p) {
  const ValidationReport rep = validate_partition(p);
  if (!rep.covering) throw ValidationError("partition leaves samples unlabeled");
  if (!rep.connected) throw ValidationError("partition has a disconnected region");
  const FrequencyGrid grid = p.grid();
  std::vector<RegionMask> out;
  for (int l : p.label_set()) {
    RegionMask r;
    r.index = l;
    r.mask = SampleMask(p.width, p.height, 0);
    r.bounded = true;
    double sx = 0.0, sy = 0.0;
    for (int j = 0; j < p.height; ++j)
      for (int i = 0; i < p.width; ++i) {
        if (p.labels(i, j) != l) continue;
        r.mask(i, j) = 1;
        ++r.count;
        const Vec2 xi = grid.xi(i, j);
        sx += xi.x;
        sy += xi.y;
        if (i == 0 || i == p.width - 1) r.bounded = false;
        if (!grid.is_1d() && (j == 0 || j == p.height - 1)) r.bounded = false;
      }
    r.centroid = {sx / static_cast<double>(r.count), sy / static_cast<double>(r.count)};
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json partition_to_json(const PartitionLabelMap& p) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : p.seeds) seeds.push_back({{"label", s.label}, {"offset", {s.di, s.dj}}});
  return {{"num_regions", p.num_regions()},
          {"symmetric", p.symmetric},
          {"labels", p.label_set()},
          {"width", p.width},
          {"height", p.height},
          {"seeds", seeds},
          {"warnings", p.warnings}};
}

PartitionLabelMap partition_from_json(const nlohmann::json& doc) {
  try {
    PartitionLabelMap p;
    p.width = doc.at("width").get<int>();
    p.height = doc.at("height").get<int>();
    p.symmetric = doc.value("symmetric", true);
    p.labels = Field<int>(p.width, p.height, unlabeled);
    for (const auto& s : doc.at("seeds"))
      p.seeds.push_back({s.at("label").get<int>(), s.at("offset")[0].get<int>(), s.at("offset")[1].get<int>()});
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed partition document: ") + e.what());
  }
}

}  // namespace ewt

#include "ewt/modes.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ewt/gaussian.hpp"

namespace ewt {

namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

struct LevelStats {
  double median;
  double threshold;
};

LevelStats level_stats(const RealImage& s, const ScaleSpaceParams& p) {
  const double med = median_of(s.data);
  std::vector<double> dev(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) dev[k] = std::abs(s.data[k] - med);
  const double mad = median_of(dev);
  const double top = *std::max_element(s.data.begin(), s.data.end());
  const double thr = std::max(p.significance * 1.4826 * mad, p.relative_floor * (top - med));
  return {med, thr};
}

// Strict 8-neighbour maximum; equal values resolve toward the lower index.
bool is_local_max(const RealImage& s, int i, int j) {
  const double v = s(i, j);
  const std::size_t self = s.index(i, j);
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      if (di == 0 && dj == 0) continue;
      const int ni = i + di, nj = j + dj;
      if (ni < 0 || nj < 0 || ni >= s.width || nj >= s.height) continue;
      const double w = s(ni, nj);
      if (w > v || (w == v && s.index(ni, nj) < self)) return false;
    }
  return true;
}

std::vector<std::pair<int, int>> significant_maxima(const RealImage& s, const ScaleSpaceParams& p) {
  const LevelStats st = level_stats(s, p);
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < s.height; ++j)
    for (int i = 0; i < s.width; ++i)
      if (s(i, j) - st.median > st.threshold && is_local_max(s, i, j)) out.emplace_back(i, j);
  return out;
}

bool in_half_plane(int di, int dj) { return dj > 0 || (dj == 0 && di > 0); }

long long round_half_away(double v) { return static_cast<long long>(std::llround(v)); }

}  // namespace

void ScaleSpaceParams::validate() const {
  if (!(s0 > 0)) throw ValidationError("s0 must be positive");
  if (!(scale_step > 0)) throw ValidationError("scale_step must be positive");
  if (num_levels < 2) throw ValidationError("num_levels must be at least 2");
  if (min_separation < 0) throw ValidationError("min_separation must be non-negative");
  if (!(significance >= 0) || !(relative_floor >= 0))
    throw ValidationError("significance parameters must be non-negative");
}

bool ModeSet::contains_dc() const { return find(0, 0) != nullptr; }

const Mode* ModeSet::find(int di, int dj) const {
  for (const auto& m : modes)
    if (m.di == di && m.dj == dj) return &m;
  return nullptr;
}

int ModeSet::non_dc_count() const {
  return static_cast<int>(std::count_if(modes.begin(), modes.end(), [](const Mode& m) { return !m.is_dc(); }));
}

ModeSet detect_modes(const RealImage& log_spec, const ScaleSpaceParams& params) {
  params.validate();
  require_finite(log_spec, "log spectrum");
  const FrequencyGrid grid = grid_of(log_spec);
  ModeSet result;
  result.width = log_spec.width;
  result.height = log_spec.height;
  result.symmetric = true;

  // point-symmetric version of the spectrum (Nyquist lines kept as they are)
  RealImage sym(log_spec.width, log_spec.height);
  for (int j = 0; j < grid.height(); ++j)
    for (int i = 0; i < grid.width(); ++i) {
      const auto m = grid.mirror(i, j);
      sym(i, j) = m ? 0.5 * (log_spec(i, j) + log_spec(m->first, m->second)) : log_spec(i, j);
    }
  const double med = median_of(sym.data);
  for (double& v : sym.data) v -= med;

  const auto [lo, hi] = std::minmax_element(sym.data.begin(), sym.data.end());
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) {
    result.modes.push_back({0, 0, params.scale_step * params.num_levels, 0.0});
    return result;
  }

  std::vector<RealImage> levels;
  std::vector<std::vector<std::pair<int, int>>> maxima;
  levels.reserve(static_cast<std::size_t>(params.num_levels));
  for (int k = 1; k <= params.num_levels; ++k) {
    levels.push_back(gaussian_smooth(sym, k * params.scale_step, Boundary::Periodic));
    maxima.push_back(significant_maxima(levels.back(), params));
  }

  const double sep2 = static_cast<double>(params.min_separation) * params.min_separation;
  auto lifetime = [&](std::pair<int, int> start) {
    int count = 1;
    auto cur = start;
    for (std::size_t k = 1; k < maxima.size(); ++k) {
      double best = sep2 + 1.0;
      std::pair<int, int> next{};
      for (const auto& q : maxima[k]) {
        const double dx = q.first - cur.first, dy = q.second - cur.second;
        const double d2 = dx * dx + dy * dy;
        if (d2 <= sep2 && d2 < best) {
          best = d2;
          next = q;
        }
      }
      if (best > sep2) break;
      cur = next;
      ++count;
    }
    return count * params.scale_step;
  };

  const RealImage& first = levels.front();
  bool have_dc = false;
  for (const auto& p : maxima.front()) {
    const int di = grid.offset_i(p.first), dj = grid.offset_j(p.second);
    const bool dc = di == 0 && dj == 0;
    const bool nyq = grid.on_nyquist(p.first, p.second);
    const bool nyq_keep = nyq && (dj >= 0 || p.second == 0);
    if (!dc && !(nyq ? nyq_keep : in_half_plane(di, dj))) continue;
    const double life = lifetime(p);
    if (!dc && !(life > params.s0)) continue;
    const double amp = first(p.first, p.second);
    result.modes.push_back({di, dj, life, amp});
    if (dc) {
      have_dc = true;
    } else if (!nyq) {
      result.modes.push_back({-di, -dj, life, amp});
    }
  }
  if (!have_dc) {
    const int ci = grid.center_i(), cj = grid.center_j();
    result.modes.push_back({0, 0, 0.0, first(ci, cj)});
  }
  std::stable_sort(result.modes.begin(), result.modes.end(), [](const Mode& a, const Mode& b) {
    if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
    if (a.dj != b.dj) return a.dj < b.dj;
    return a.di < b.di;
  });
  return result;
}

ModeSet symmetrize_modes(const ModeSet& in, int min_separation) {
  if (in.width < 1 || in.height < 1) throw ValidationError("mode set without grid dimensions");
  const FrequencyGrid grid(in.width, in.height);
  auto on_grid = [&](int di, int dj) { return grid.index_of_offset(di, dj).has_value(); };

  ModeSet out;
  out.width = in.width;
  out.height = in.height;
  out.symmetric = true;
  std::map<std::pair<int, int>, Mode> kept;
  auto add = [&](int di, int dj, double life, double amp) {
    auto [it, inserted] = kept.try_emplace({di, dj}, Mode{di, dj, life, amp});
    if (!inserted) {
      it->second.persistence = std::max(it->second.persistence, life);
      it->second.amplitude = std::max(it->second.amplitude, amp);
    }
  };

  std::vector<Mode> rest;
  double dc_life = 0.0, dc_amp = 0.0;
  for (const auto& m : in.modes) {
    if (m.is_dc()) {
      dc_life = m.persistence;
      dc_amp = m.amplitude;
    } else {
      rest.push_back(m);
    }
  }
  add(0, 0, dc_life, dc_amp);

  std::vector<bool> done(rest.size(), false);
  // exact partners
  for (std::size_t a = 0; a < rest.size(); ++a) {
    if (done[a]) continue;
    for (std::size_t b = 0; b < rest.size(); ++b) {
      if (b == a || done[b]) continue;
      if (rest[b].di == -rest[a].di && rest[b].dj == -rest[a].dj) {
        const double life = std::max(rest[a].persistence, rest[b].persistence);
        const double amp = std::max(rest[a].amplitude, rest[b].amplitude);
        add(rest[a].di, rest[a].dj, life, amp);
        add(rest[b].di, rest[b].dj, life, amp);
        done[a] = done[b] = true;
        break;
      }
    }
  }
  // near partners, then forced pairing
  const double sep2 = static_cast<double>(min_separation) * min_separation;
  for (std::size_t a = 0; a < rest.size(); ++a) {
    if (done[a]) continue;
    done[a] = true;
    const Mode& m = rest[a];
    std::size_t partner = rest.size();
    double best = sep2 + 1.0;
    for (std::size_t b = 0; b < rest.size(); ++b) {
      if (done[b]) continue;
      const double dx = rest[b].di + m.di, dy = rest[b].dj + m.dj;
      const double d2 = dx * dx + dy * dy;
      if (d2 <= sep2 && d2 < best) {
        best = d2;
        partner = b;
      }
    }
    if (partner < rest.size()) {
      done[partner] = true;
      const Mode& p = rest[partner];
      const int ai = static_cast<int>(round_half_away(0.5 * (m.di - p.di)));
      const int aj = static_cast<int>(round_half_away(0.5 * (m.dj - p.dj)));
      const double life = std::max(m.persistence, p.persistence);
      const double amp = std::max(m.amplitude, p.amplitude);
      if (ai == 0 && aj == 0) continue;
      if (on_grid(ai, aj)) add(ai, aj, life, amp);
      if (on_grid(-ai, -aj)) add(-ai, -aj, life, amp);
    } else {
      add(m.di, m.dj, m.persistence, m.amplitude);
      if (on_grid(-m.di, -m.dj)) add(-m.di, -m.dj, m.persistence, m.amplitude);
    }
  }

  for (const auto& [key, m] : kept) out.modes.push_back(m);
  std::stable_sort(out.modes.begin(), out.modes.end(), [](const Mode& a, const Mode& b) {
    if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
    if (a.dj != b.dj) return a.dj < b.dj;
    return a.di < b.di;
  });
  return out;
}

nlohmann::json modes_to_json(const ModeSet& modes) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& m : modes.modes) {
    const Vec2 xi = modes.xi(m);
    list.push_back({{"xi", {xi.x, xi.y}},
                    {"offset", {m.di, m.dj}},
                    {"persistence", m.persistence},
                    {"amplitude", m.amplitude}});
  }
  return {{"modes", list}, {"symmetric", modes.symmetric}, {"width", modes.width}, {"height", modes.height}};
}

ModeSet modes_from_json(const nlohmann::json& doc) {
  try {
    ModeSet out;
    out.width = doc.at("width").get<int>();
    out.height = doc.at("height").get<int>();
    out.symmetric = doc.value("symmetric", false);
    for (const auto& e : doc.at("modes")) {
      Mode m;
      if (e.contains("offset")) {
        m.di = e["offset"][0].get<int>();
        m.dj = e["offset"][1].get<int>();
      } else {
        m.di = static_cast<int>(std::lround(e.at("xi")[0].get<double>() * out.width));
        m.dj = static_cast<int>(std::lround(e.at("xi")[1].get<double>() * out.height));
      }
      m.persistence = e.value("persistence", 0.0);
      m.amplitude = e.value("amplitude", 0.0);
      out.modes.push_back(m);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed mode document: ") + e.what());
  }
}

}  // namespace ewt

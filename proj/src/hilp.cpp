#include "outage/hilp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "outage/csv.hpp"
#include "outage/error.hpp"
#include "outage/simd.hpp"

namespace outage {

std::array<double, kWeatherFields> StandardizationParams::standardize(std::span<const double> x) const {
  std::array<double, kWeatherFields> z{};
  for (std::size_t f = 0; f < kWeatherFields; ++f) z[f] = (x[f] - mu[f]) / sigma[f];
  return z;
}

bool ExtremeEventSet::contains(CellRef cell) const {
  return std::any_of(entries.begin(), entries.end(), [&](const ExtremeEntry& e) { return e.cell == cell; });
}

std::vector<CellRef> ExtremeEventSet::cells() const {
  std::vector<CellRef> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.cell);
  std::sort(out.begin(), out.end());
  return out;
}

StormMask::StormMask(const PanelDataset& panel, std::span<const StormEvent> storms)
    : hours_(panel.hour_count()), mask_(panel.cell_count(), 0) {
  for (const auto& s : storms) {
    const auto c = panel.find_county(s.county_id);
    if (!c) continue;
    // first panel hour >= start
    UtcTime first = std::chrono::ceil<Hours>(s.start);
    if (first < panel.start()) first = panel.start();
    for (UtcTime t = first; t <= s.end && t < panel.end(); t += Hours{1}) mask_[*c * hours_ + *panel.hour_index(t)] = 1;
  }
}

std::size_t StormMask::covered_count() const noexcept {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

int weather_indicator(std::span<const StormEvent> storms, std::string_view county_id, UtcTime t) {
  for (const auto& s : storms)
    if (s.county_id == county_id && s.start <= t && t <= s.end) return 1;
  return 0;
}

double nearest_rank_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw UserError("quantile of an empty set");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw UserError("alpha must lie in [0, 1]");
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::max(0.0, std::ceil(alpha * n - 1e-9)));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

namespace {

std::vector<double> storm_hour_outages(const PanelDataset& panel, const StormMask& mask) {
  std::vector<double> values;
  for (std::size_t c = 0; c < panel.county_count(); ++c)
    for (std::size_t h = 0; h < panel.hour_count(); ++h)
      if (mask.covered(c, h) && panel.outage_state(c, h) == CellState::Present) values.push_back(panel.outage(c, h));
  return values;
}

bool in_season(int month, int seed_month, int window) {
  const int d = ((month - seed_month) % 12 + 12) % 12;
  return d <= window || d >= 12 - window;
}

std::vector<AnalogMatch> rank_candidates(std::span<const double> vectors, const PanelDataset& panel, CellRef seed,
                                         std::size_t k, const StandardizationParams& params, const HilpConfig& cfg) {
  if (k == 0) return {};
  const auto candidates = seasonal_candidates(panel, seed, cfg.season_window, cfg.utc_offset);
  auto vec_at = [&](CellRef c) {
    return vectors.subspan((c.county * panel.hour_count() + c.hour) * kWeatherFields, kWeatherFields);
  };
  const auto z_seed = params.standardize(vec_at(seed));
  std::vector<AnalogMatch> scored;
  scored.reserve(candidates.size());
  for (const auto& cand : candidates) {
    const auto z = params.standardize(vec_at(cand));
    scored.push_back({cand, simd::squared_distance(z_seed, z)});
  }
  auto closer = [](const AnalogMatch& a, const AnalogMatch& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.cell.hour < b.cell.hour;
  };
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), closer);
  scored.resize(keep);
  for (auto& m : scored) m.distance = std::sqrt(m.distance);
  return scored;
}

}  // namespace

double outage_quantile(const PanelDataset& panel, std::span<const StormEvent> storms, double alpha) {
  const StormMask mask(panel, storms);
  auto values = storm_hour_outages(panel, mask);
  if (values.empty()) throw UserError("no storm-covered hours with observed outages; cannot compute the quantile");
  return nearest_rank_quantile(std::move(values), alpha);
}

std::vector<HilpSeed> identify_seeds(const PanelDataset& panel, std::span<const StormEvent> storms, double alpha) {
  const StormMask mask(panel, storms);
  auto values = storm_hour_outages(panel, mask);
  if (values.empty()) throw UserError("no storm-covered hours with observed outages; cannot compute the quantile");
  const double q = nearest_rank_quantile(std::move(values), alpha);
  std::vector<HilpSeed> seeds;
  for (std::size_t c = 0; c < panel.county_count(); ++c)
    for (std::size_t h = 0; h < panel.hour_count(); ++h)
      if (mask.covered(c, h) && panel.outage_state(c, h) == CellState::Present && panel.outage(c, h) >= q)
        seeds.push_back({panel.county_id(c), panel.time_at(h), panel.outage(c, h), {c, h}});
  return seeds;
}

std::vector<CellRef> seasonal_candidates(const PanelDataset& panel, CellRef seed, int window, Hours utc_offset) {
  if (seed.county >= panel.county_count() || seed.hour >= panel.hour_count())
    throw UserError("seed cell outside the panel");
  if (window < 0 || window > 6) throw UserError("season window must be in [0, 6] months");
  const int seed_month = local_month(panel.time_at(seed.hour), utc_offset);
  std::vector<CellRef> out;
  for (std::size_t h = 0; h < panel.hour_count(); ++h)
    if (h != seed.hour && in_season(local_month(panel.time_at(h), utc_offset), seed_month, window))
      out.push_back({seed.county, h});
  return out;
}

std::vector<double> weather_vectors(const PanelDataset& panel, WeatherAggregation aggregation, Hours utc_offset) {
  std::vector<double> out(panel.cell_count() * kWeatherFields);
  for (std::size_t c = 0; c < panel.county_count(); ++c)
    for (std::size_t h = 0; h < panel.hour_count(); ++h) {
      const auto v = panel.weather_vector(c, h);
      std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>((c * panel.hour_count() + h) * kWeatherFields));
    }
  if (aggregation == WeatherAggregation::Hourly) return out;

  std::vector<double> daily(out.size());
  for (std::size_t c = 0; c < panel.county_count(); ++c) {
    std::size_t h = 0;
    while (h < panel.hour_count()) {
      const long long day = local_day(panel.time_at(h), utc_offset);
      std::size_t e = h;
      while (e < panel.hour_count() && local_day(panel.time_at(e), utc_offset) == day) ++e;
      std::array<double, kWeatherFields> mean{};
      for (std::size_t t = h; t < e; ++t)
        for (std::size_t f = 0; f < kWeatherFields; ++f) mean[f] += out[(c * panel.hour_count() + t) * kWeatherFields + f];
      for (auto& m : mean) m /= static_cast<double>(e - h);
      for (std::size_t t = h; t < e; ++t)
        std::copy(mean.begin(), mean.end(),
                  daily.begin() + static_cast<std::ptrdiff_t>((c * panel.hour_count() + t) * kWeatherFields));
      h = e;
    }
  }
  return daily;
}

StandardizationParams fit_standardization(std::span<const double> vectors) {
  if (vectors.empty() || vectors.size() % kWeatherFields != 0) throw UserError("no weather vectors to standardize");
  const std::size_t n = vectors.size() / kWeatherFields;
  StandardizationParams p;
  for (std::size_t f = 0; f < kWeatherFields; ++f) {
    double sum = 0.0, lo = vectors[f], hi = vectors[f];
    for (std::size_t i = 0; i < n; ++i) {
      const double v = vectors[i * kWeatherFields + f];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) throw UserError("zero variance: " + std::string(kWeatherNames[f]));
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = vectors[i * kWeatherFields + f] - mean;
      ss += d * d;
    }
    p.mu[f] = mean;
    p.sigma[f] = std::sqrt(ss / static_cast<double>(n));
  }
  return p;
}

StandardizationParams fit_standardization(const PanelDataset& panel) {
  if (!panel.weather_complete()) throw UserError("standardization requires a complete (imputed) weather panel");
  return fit_standardization(weather_vectors(panel, WeatherAggregation::Hourly, Hours{0}));
}

double weather_distance(std::span<const double> x1, std::span<const double> x2, const StandardizationParams& params) {
  const auto z1 = params.standardize(x1);
  const auto z2 = params.standardize(x2);
  return std::sqrt(simd::squared_distance(z1, z2));
}

std::vector<AnalogMatch> select_analogs(const HilpSeed& seed, std::size_t k, const PanelDataset& panel,
                                        const StandardizationParams& params, const HilpConfig& config) {
  const auto vectors = weather_vectors(panel, config.aggregation, config.utc_offset);
  return rank_candidates(vectors, panel, seed.cell, k, params, config);
}

ExtremeEventSet build_extreme_set(const PanelDataset& panel, std::span<const StormEvent> storms,
                                  const HilpConfig& config) {
  if (!panel.weather_complete()) throw UserError("analog selection requires a complete (imputed) weather panel");
  ExtremeEventSet set;
  set.seeds = identify_seeds(panel, storms, config.alpha);
  const auto vectors = weather_vectors(panel, config.aggregation, config.utc_offset);
  const auto params = fit_standardization(vectors);

  std::set<CellRef> seen;
  for (const auto& s : set.seeds) seen.insert(s.cell);
  std::set<CellRef> emitted;
  for (std::size_t i = 0; i < set.seeds.size(); ++i) {
    set.analogs.push_back(rank_candidates(vectors, panel, set.seeds[i].cell, config.analogs_per_seed, params, config));
    if (emitted.insert(set.seeds[i].cell).second) set.entries.push_back({set.seeds[i].cell, EventOrigin::Seed, i});
    for (const auto& a : set.analogs.back())
      if (!seen.count(a.cell) && emitted.insert(a.cell).second)
        set.entries.push_back({a.cell, EventOrigin::Analog, i});
  }
  return set;
}

void write_extreme_set_csv(std::ostream& out, const ExtremeEventSet& set, const PanelDataset& panel) {
  csv::write_row(out, {"county_id", "timestamp", "origin", "seed_ref"});
  for (const auto& e : set.entries)
    csv::write_row(out, {panel.county_id(e.cell.county), format_utc(panel.time_at(e.cell.hour)),
                         e.origin == EventOrigin::Seed ? "seed" : "analog",
                         format_utc(set.seeds[e.seed_index].t_ex)});
}

ExtremeEventSet read_extreme_set_csv(const std::filesystem::path& path, const PanelDataset& panel) {
  const csv::Table t = csv::read_file(path);
  csv::require_header(t, {"county_id", "timestamp", "origin", "seed_ref"});
  ExtremeEventSet set;
  std::map<CellRef, std::size_t> seed_pos;
  auto cell_of = [&](const csv::Row& row, std::size_t col) {
    const std::size_t c = panel.county_index(row.fields[0]);
    const auto h = panel.hour_index(parse_utc(row.fields[col]));
    if (!h) throw ParseError(t.source, row.line, t.header[col], "timestamp outside the panel");
    return CellRef{c, *h};
  };
  for (const auto& row : t.rows) {
    const CellRef cell = cell_of(row, 1);
    if (row.fields[2] == "seed") {
      seed_pos[cell] = set.seeds.size();
      set.seeds.push_back({panel.county_id(cell.county), panel.time_at(cell.hour), panel.outage(cell.county, cell.hour), cell});
      set.analogs.emplace_back();
      set.entries.push_back({cell, EventOrigin::Seed, seed_pos[cell]});
    } else if (row.fields[2] == "analog") {
      const auto it = seed_pos.find(cell_of(row, 3));
      if (it == seed_pos.end()) throw ParseError(t.source, row.line, "seed_ref", "analog refers to an unknown seed");
      set.analogs[it->second].push_back({cell, 0.0});
      set.entries.push_back({cell, EventOrigin::Analog, it->second});
    } else {
      throw ParseError(t.source, row.line, "origin", "expected 'seed' or 'analog'");
    }
  }
  return set;
}

}  // namespace outage

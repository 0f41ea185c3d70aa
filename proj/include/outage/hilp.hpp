#pragma once

// High-impact low-probability (HILP) seed identification and seasonal weather
// analog expansion.

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "outage/ingest.hpp"

namespace outage {

struct CellRef {
  std::size_t county = 0;
  std::size_t hour = 0;

  auto operator<=>(const CellRef&) const = default;
};

struct HilpSeed {
  std::string county_id;
  UtcTime t_ex;
  double y_value = 0.0;
  CellRef cell;
};

struct StandardizationParams {
  std::array<double, kWeatherFields> mu{};
  std::array<double, kWeatherFields> sigma{};

  std::array<double, kWeatherFields> standardize(std::span<const double> x) const;
};

enum class WeatherAggregation { Hourly, Daily };

struct HilpConfig {
  double alpha = 0.7;
  std::size_t analogs_per_seed = 10;
  int season_window = 1;  // months either side of the seed month
  Hours utc_offset{-5};
  WeatherAggregation aggregation = WeatherAggregation::Hourly;
};

enum class EventOrigin { Seed, Analog };

struct ExtremeEntry {
  CellRef cell;
  EventOrigin origin = EventOrigin::Seed;
  std::size_t seed_index = 0;  // seed that introduced this cell

  bool operator==(const ExtremeEntry&) const = default;
};

struct AnalogMatch {
  CellRef cell;
  double distance = 0.0;
};

struct ExtremeEventSet {
  std::vector<HilpSeed> seeds;
  std::vector<std::vector<AnalogMatch>> analogs;  // per seed, nearest first
  std::vector<ExtremeEntry> entries;              // deduplicated union, seeds first within each group

  bool contains(CellRef cell) const;
  std::vector<CellRef> cells() const;  // sorted by (county, hour)
};

/// Per-cell storm coverage: true when a storm in that county has start <= t <= end.
class StormMask {
 public:
  StormMask(const PanelDataset& panel, std::span<const StormEvent> storms);
  bool covered(std::size_t county, std::size_t hour) const noexcept { return mask_[county * hours_ + hour] != 0; }
  std::size_t covered_count() const noexcept;

 private:
  std::size_t hours_;
  std::vector<unsigned char> mask_;
};

/// 1 iff some storm of `county_id` satisfies start <= t <= end.
int weather_indicator(std::span<const StormEvent> storms, std::string_view county_id, UtcTime t);

/// ceil(alpha*N)-th order statistic (1-based, clamped to [1, N]).
double nearest_rank_quantile(std::vector<double> values, double alpha);

/// Nearest-rank alpha-quantile of observed outages over storm-covered hours.
double outage_quantile(const PanelDataset& panel, std::span<const StormEvent> storms, double alpha);

std::vector<HilpSeed> identify_seeds(const PanelDataset& panel, std::span<const StormEvent> storms, double alpha);

/// Hours of the seed's county whose local month is within `window` months of the
/// seed month (wrapping across the year), excluding the seed hour.
std::vector<CellRef> seasonal_candidates(const PanelDataset& panel, CellRef seed, int window = 1,
                                         Hours utc_offset = Hours{-5});

/// Weather vectors per cell (county-major, 8 per cell), hourly or as local-day means.
std::vector<double> weather_vectors(const PanelDataset& panel, WeatherAggregation aggregation, Hours utc_offset);

/// Population mean and standard deviation per feature over the complete panel.
StandardizationParams fit_standardization(const PanelDataset& panel);
StandardizationParams fit_standardization(std::span<const double> vectors);

double weather_distance(std::span<const double> x1, std::span<const double> x2, const StandardizationParams& params);

/// The K seasonal candidates closest to the seed in standardized weather space,
/// ties by earlier timestamp.
std::vector<AnalogMatch> select_analogs(const HilpSeed& seed, std::size_t k, const PanelDataset& panel,
                                        const StandardizationParams& params, const HilpConfig& config = {});

ExtremeEventSet build_extreme_set(const PanelDataset& panel, std::span<const StormEvent> storms,
                                  const HilpConfig& config = {});

/// CSV: county_id,timestamp,origin,seed_ref (seed_ref = timestamp of the introducing seed).
void write_extreme_set_csv(std::ostream& out, const ExtremeEventSet& set, const PanelDataset& panel);
ExtremeEventSet read_extreme_set_csv(const std::filesystem::path& path, const PanelDataset& panel);

}  // namespace outage

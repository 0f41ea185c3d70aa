#pragma once

// Input schemas, record parsing and the aligned county x hour panel.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "outage/time.hpp"

namespace outage {

inline constexpr std::size_t kWeatherFields = 8;

/// CSV column names of the eight weather features, in vector order.
inline constexpr std::array<std::string_view, kWeatherFields> kWeatherColumns = {
    "temp_f", "precip_in", "wind_kmh", "gust_kmh", "swr_wm2", "rh_pct", "cloud_pct", "pressure_hpa"};

/// Human-readable feature names used in diagnostics.
inline constexpr std::array<std::string_view, kWeatherFields> kWeatherNames = {
    "temperature",         "precipitation",     "wind_speed",  "wind_gust",
    "shortwave_radiation", "relative_humidity", "cloud_cover", "surface_pressure"};

enum WeatherIndex : std::size_t {
  kTemperature = 0,
  kPrecipitation,
  kWindSpeed,
  kWindGust,
  kShortwave,
  kHumidity,
  kCloudCover,
  kPressure
};

inline constexpr std::size_t kInfraCategories = 5;
inline constexpr std::array<std::string_view, kInfraCategories> kInfraNames = {"poles", "towers", "substations",
                                                                               "transformers", "lines"};

inline constexpr std::size_t kBuildingAgeBuckets = 3;
inline constexpr std::array<std::string_view, kBuildingAgeBuckets> kBuildingAgeColumns = {
    "built_pre1960", "built_1960_1999", "built_2000_plus"};

enum class CellState : std::uint8_t { Present, Missing, Imputed };

struct OutageRecord {
  std::string county_id;
  UtcTime timestamp;
  std::int64_t customers_out = 0;
};

struct WeatherRecord {
  std::string county_id;
  UtcTime timestamp;
  std::array<std::optional<double>, kWeatherFields> values;
};

struct CensusRecord {
  std::string county_id;
  double latitude = 0.0;
  double longitude = 0.0;
  double avg_household_income = 0.0;
  double unemployment_rate = 0.0;
  std::array<double, kBuildingAgeBuckets> building_age_distribution{};
};

struct InfrastructureRecord {
  std::string county_id;
  std::array<std::int64_t, kInfraCategories> counts{};
};

struct CountyStatic {
  std::string county_id;
  double latitude = 0.0;
  double longitude = 0.0;
  double avg_household_income = 0.0;
  double unemployment_rate = 0.0;
  std::array<double, kBuildingAgeBuckets> building_age_distribution{};
  std::array<std::int64_t, kInfraCategories> infra_counts{};
  std::array<double, kInfraCategories> infra_shares{};

  bool operator==(const CountyStatic&) const = default;
};

struct StormEvent {
  std::string county_id;
  UtcTime start;
  UtcTime end;
  std::string event_type;
};

/// Hourly outage values of one county, starting at `start`; nullopt = no readings in that hour.
struct HourlySeries {
  std::string county_id;
  UtcTime start;
  std::vector<std::optional<std::int64_t>> values;
};

struct TimeRange {
  UtcTime start;  // inclusive, hour aligned
  UtcTime end;    // exclusive, hour aligned
};

std::vector<OutageRecord> parse_outage_csv(const std::filesystem::path& path);
std::vector<WeatherRecord> parse_weather_csv(const std::filesystem::path& path);
std::vector<CensusRecord> parse_census_csv(const std::filesystem::path& path);
std::vector<InfrastructureRecord> parse_infrastructure_csv(const std::filesystem::path& path);
std::vector<StormEvent> parse_storm_events_csv(const std::filesystem::path& path);

void write_outage_csv(std::ostream& out, std::span<const OutageRecord> records);
void write_weather_csv(std::ostream& out, std::span<const WeatherRecord> records);
void write_census_csv(std::ostream& out, std::span<const CensusRecord> records);
void write_infrastructure_csv(std::ostream& out, std::span<const InfrastructureRecord> records);
void write_storm_events_csv(std::ostream& out, std::span<const StormEvent> storms);

/// Hourly maximum of the quarter-hour readings. `records` must be sorted by (county, time).
std::vector<HourlySeries> resample_outages_hourly(std::span<const OutageRecord> records);

/// Column-wise shares: count(c,k) / sum over counties of count(.,k).
std::vector<std::array<double, kInfraCategories>> normalize_infrastructure(
    std::span<const InfrastructureRecord> records);

/// Joins census and infrastructure rows by county id (sets must match) and sorts by id.
std::vector<CountyStatic> assemble_statics(std::span<const CensusRecord> census,
                                           std::span<const InfrastructureRecord> infra);

/// Rectangular county x hour grid. Counties are ordered by id; missing cells carry
/// an explicit CellState rather than a sentinel value.
class PanelDataset {
 public:
  PanelDataset() = default;
  PanelDataset(std::vector<CountyStatic> statics, UtcTime start, std::size_t hours);

  std::size_t county_count() const noexcept { return statics_.size(); }
  std::size_t hour_count() const noexcept { return hours_; }
  std::size_t cell_count() const noexcept { return county_count() * hour_count(); }
  UtcTime start() const noexcept { return start_; }
  UtcTime end() const noexcept { return start_ + Hours{static_cast<long long>(hours_)}; }
  UtcTime time_at(std::size_t h) const noexcept { return start_ + Hours{static_cast<long long>(h)}; }
  std::optional<std::size_t> hour_index(UtcTime t) const noexcept;

  const std::string& county_id(std::size_t c) const noexcept { return statics_[c].county_id; }
  std::optional<std::size_t> find_county(std::string_view id) const noexcept;
  std::size_t county_index(std::string_view id) const;  // throws on unknown id
  const CountyStatic& statics(std::size_t c) const noexcept { return statics_[c]; }
  const std::vector<CountyStatic>& all_statics() const noexcept { return statics_; }

  double outage(std::size_t c, std::size_t h) const noexcept { return outage_[c * hours_ + h]; }
  CellState outage_state(std::size_t c, std::size_t h) const noexcept { return outage_state_[c * hours_ + h]; }
  bool has_outage(std::size_t c, std::size_t h) const noexcept { return outage_state(c, h) != CellState::Missing; }
  void set_outage(std::size_t c, std::size_t h, double value, CellState state) noexcept;

  double weather(std::size_t c, std::size_t h, std::size_t f) const noexcept {
    return weather_[(c * hours_ + h) * kWeatherFields + f];
  }
  CellState weather_state(std::size_t c, std::size_t h, std::size_t f) const noexcept {
    return weather_state_[(c * hours_ + h) * kWeatherFields + f];
  }
  bool has_weather(std::size_t c, std::size_t h, std::size_t f) const noexcept {
    return weather_state(c, h, f) != CellState::Missing;
  }
  std::span<const double> weather_vector(std::size_t c, std::size_t h) const noexcept {
    return {weather_.data() + (c * hours_ + h) * kWeatherFields, kWeatherFields};
  }
  void set_weather(std::size_t c, std::size_t h, std::size_t f, double value, CellState state) noexcept;

  std::size_t missing_weather_cells() const noexcept;
  std::size_t missing_outage_cells() const noexcept;
  bool weather_complete() const noexcept { return missing_weather_cells() == 0; }

  bool operator==(const PanelDataset&) const = default;

 private:
  std::vector<CountyStatic> statics_;
  UtcTime start_{};
  std::size_t hours_ = 0;
  std::vector<double> outage_;
  std::vector<CellState> outage_state_;
  std::vector<double> weather_;
  std::vector<CellState> weather_state_;
};

PanelDataset build_panel(std::span<const HourlySeries> outages, std::span<const WeatherRecord> weather,
                         std::vector<CountyStatic> statics, TimeRange range);

/// Panel layout: county_id,timestamp_utc,customers_out,<8 weather columns>,imputed_mask.
/// Empty cell = missing; imputed_mask bit 0 flags the outage value, bit 1+f weather field f.
void write_panel_csv(std::ostream& out, const PanelDataset& panel);
PanelDataset read_panel_csv(const std::filesystem::path& path, std::vector<CountyStatic> statics);
PanelDataset read_panel_csv(std::istream& in, std::vector<CountyStatic> statics);

/// Statics layout: census columns, raw infrastructure counts, then share_<category>.
void write_statics_csv(std::ostream& out, std::span<const CountyStatic> statics);
std::vector<CountyStatic> read_statics_csv(const std::filesystem::path& path);

}  // namespace outage

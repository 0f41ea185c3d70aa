#pragma once

// Reproducible toy inputs with injected storms and a known outage function.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "outage/ingest.hpp"

namespace outage {

struct SynthConfig {
  std::size_t counties = 5;
  std::size_t hours = 2000;
  std::uint64_t seed = 7;
  UtcTime start = parse_utc("2020-01-01T00:00:00Z");
  double missing_weather_fraction = 0.01;
  double missing_outage_fraction = 0.005;
  std::size_t storms_per_1000h = 4;
};

struct SynthData {
  std::vector<OutageRecord> outages;  // quarter-hour readings
  std::vector<WeatherRecord> weather;
  std::vector<CensusRecord> census;
  std::vector<InfrastructureRecord> infrastructure;
  std::vector<StormEvent> storms;
};

/// Expected hourly outage given the previous hour's precipitation (in) and wind (km/h).
double synth_outage_mean(double base, double precip_lag1, double wind_lag1);

SynthData generate_synth(const SynthConfig& cfg);

/// Writes outages.csv, weather.csv, census.csv, infrastructure.csv and storms.csv.
void write_synth(const SynthData& data, const std::filesystem::path& dir);

}  // namespace outage

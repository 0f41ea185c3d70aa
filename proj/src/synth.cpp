#include "outage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "outage/error.hpp"
#include "outage/rng.hpp"

namespace outage {

double synth_outage_mean(double base, double precip_lag1, double wind_lag1) {
  return base + 650.0 * precip_lag1 + 14.0 * std::max(0.0, wind_lag1 - 25.0);
}

SynthData generate_synth(const SynthConfig& cfg) {
  if (cfg.counties == 0 || cfg.hours < 48) throw UserError("synth needs at least 1 county and 48 hours");
  SynthData d;
  Rng rng = derive_rng(cfg.seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::string> ids;
  std::vector<double> base;
  for (std::size_t c = 0; c < cfg.counties; ++c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "26%03zu", 2 * c + 1);
    ids.emplace_back(buf);
    CensusRecord cr;
    cr.county_id = buf;
    cr.latitude = 42.0 + 4.0 * unit(rng);
    cr.longitude = -86.5 + 3.5 * unit(rng);
    cr.avg_household_income = 40000.0 + 40000.0 * unit(rng);
    cr.unemployment_rate = 3.0 + 6.0 * unit(rng);
    const double a = unit(rng), b = unit(rng) * (1.0 - a);
    cr.building_age_distribution = {a, b, 1.0 - a - b};
    d.census.push_back(cr);
    InfrastructureRecord ir;
    ir.county_id = buf;
    for (auto& n : ir.counts) n = 50 + static_cast<std::int64_t>(950.0 * unit(rng));
    d.infrastructure.push_back(ir);
    base.push_back(10.0 + 40.0 * unit(rng));
  }

  // Storm hours per county.
  std::vector<std::vector<unsigned char>> in_storm(cfg.counties, std::vector<unsigned char>(cfg.hours, 0));
  const std::size_t storms = std::max<std::size_t>(1, cfg.hours * cfg.storms_per_1000h / 1000);
  for (std::size_t c = 0; c < cfg.counties; ++c) {
    for (std::size_t s = 0; s < storms; ++s) {
      const std::size_t len = 6 + static_cast<std::size_t>(24.0 * unit(rng));
      const std::size_t lo = 48, hi = cfg.hours > len + 49 ? cfg.hours - len - 1 : 48;
      const std::size_t h0 = lo + static_cast<std::size_t>(static_cast<double>(hi - lo) * unit(rng));
      const std::size_t h1 = std::min(cfg.hours - 1, h0 + len - 1);
      for (std::size_t h = h0; h <= h1; ++h) in_storm[c][h] = 1;
      d.storms.push_back({ids[c], cfg.start + Hours{static_cast<long long>(h0)},
                          cfg.start + Hours{static_cast<long long>(h1)}, s % 2 ? "Flood" : "Thunderstorm Wind"});
    }
  }

  for (std::size_t c = 0; c < cfg.counties; ++c) {
    double prev_precip = 0.0, prev_wind = 10.0;
    for (std::size_t h = 0; h < cfg.hours; ++h) {
      const auto t = cfg.start + Hours{static_cast<long long>(h)};
      const bool storm = in_storm[c][h] != 0;
      const double season = std::sin(2.0 * 3.14159265358979 * static_cast<double>(h) / 8760.0);
      const double diurnal = std::sin(2.0 * 3.14159265358979 * static_cast<double>(h % 24) / 24.0);
      std::array<double, kWeatherFields> w{};
      w[kTemperature] = 45.0 + 25.0 * season + 8.0 * diurnal + 3.0 * normal(rng);
      w[kPrecipitation] = storm ? 0.15 + 0.85 * unit(rng) : (unit(rng) < 0.15 ? 0.05 * unit(rng) : 0.0);
      w[kWindSpeed] = storm ? 35.0 + 45.0 * unit(rng) : 5.0 + 18.0 * unit(rng);
      w[kWindGust] = w[kWindSpeed] * (1.3 + 0.4 * unit(rng));
      w[kShortwave] = std::max(0.0, 500.0 * diurnal * (storm ? 0.3 : 1.0) + 20.0 * normal(rng));
      w[kHumidity] = std::clamp(60.0 + (storm ? 30.0 : 0.0) + 10.0 * normal(rng), 0.0, 100.0);
      w[kCloudCover] = std::clamp((storm ? 85.0 : 40.0) + 15.0 * normal(rng), 0.0, 100.0);
      w[kPressure] = 1013.0 - (storm ? 15.0 : 0.0) + 4.0 * normal(rng);

      WeatherRecord wr;
      wr.county_id = ids[c];
      wr.timestamp = t;
      for (std::size_t f = 0; f < kWeatherFields; ++f) {
        const bool drop = unit(rng) < cfg.missing_weather_fraction;
        if (!drop) wr.values[f] = std::round(w[f] * 1000.0) / 1000.0;
      }
      d.weather.push_back(wr);

      const double mean = synth_outage_mean(base[c], prev_precip, prev_wind);
      const double y = std::max(0.0, std::round(mean + 0.05 * mean * normal(rng)));
      prev_precip = wr.values[kPrecipitation].value_or(w[kPrecipitation]);
      prev_wind = wr.values[kWindSpeed].value_or(w[kWindSpeed]);
      if (unit(rng) < cfg.missing_outage_fraction) continue;
      // Quarter-hour readings; the hourly maximum equals y.
      const std::size_t peak = static_cast<std::size_t>(4.0 * unit(rng)) % 4;
      for (std::size_t q = 0; q < 4; ++q) {
        const double v = q == peak ? y : std::floor(y * (0.8 + 0.2 * unit(rng)));
        d.outages.push_back({ids[c], t + std::chrono::minutes{15 * static_cast<long long>(q)},
                             static_cast<std::int64_t>(v)});
      }
    }
  }
  std::sort(d.storms.begin(), d.storms.end(), [](const StormEvent& a, const StormEvent& b) {
    return std::tie(a.county_id, a.start, a.end) < std::tie(b.county_id, b.start, b.end);
  });
  return d;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw UserError("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open("outages.csv");
    write_outage_csv(out, data.outages);
  }
  {
    auto out = open("weather.csv");
    write_weather_csv(out, data.weather);
  }
  {
    auto out = open("census.csv");
    write_census_csv(out, data.census);
  }
  {
    auto out = open("infrastructure.csv");
    write_infrastructure_csv(out, data.infrastructure);
  }
  auto out = open("storms.csv");
  write_storm_events_csv(out, data.storms);
}

}  // namespace outage

#pragma once

// Fixture builders shared by the unit tests and the acceptance runner.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "outage/features.hpp"
#include "outage/ingest.hpp"
#include "outage/rng.hpp"

namespace fixture {

inline std::string county_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "26%03zu", 2 * i + 1);
  return buf;
}

inline std::vector<outage::CountyStatic> statics_at(const std::vector<std::pair<double, double>>& coords) {
  std::vector<outage::CountyStatic> out;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    outage::CountyStatic s;
    s.county_id = county_name(i);
    s.latitude = coords[i].first;
    s.longitude = coords[i].second;
    s.avg_household_income = 50000.0 + 1000.0 * static_cast<double>(i);
    s.unemployment_rate = 4.0 + 0.1 * static_cast<double>(i);
    s.building_age_distribution = {0.3, 0.5, 0.2};
    s.infra_counts = {10, 20, 30, 40, 50};
    const double share = 1.0 / static_cast<double>(coords.size());
    s.infra_shares = {share, share, share, share, share};
    out.push_back(s);
  }
  return out;
}

inline std::vector<outage::CountyStatic> random_statics(outage::Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> lat(41.7, 46.0), lon(-87.0, -82.5);
  std::vector<std::pair<double, double>> coords;
  for (std::size_t i = 0; i < n; ++i) coords.emplace_back(lat(rng), lon(rng));
  return statics_at(coords);
}

inline outage::UtcTime t0() { return outage::parse_utc("2020-01-01T00:00:00Z"); }

/// Complete random panel; `missing` is the fraction of weather cells dropped.
inline outage::PanelDataset random_panel(outage::Rng& rng, std::size_t counties, std::size_t hours, double missing = 0.0,
                                         outage::UtcTime start = t0()) {
  outage::PanelDataset p(random_statics(rng, counties), start, hours);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t c = 0; c < counties; ++c)
    for (std::size_t h = 0; h < hours; ++h) {
      p.set_outage(c, h, std::floor(500.0 * u(rng)), outage::CellState::Present);
      for (std::size_t f = 0; f < outage::kWeatherFields; ++f)
        if (u(rng) >= missing) p.set_weather(c, h, f, 100.0 * u(rng) - 20.0, outage::CellState::Present);
    }
  return p;
}

/// Feature matrix over every cell of a random panel with full history.
inline outage::FeatureMatrix random_features(outage::Rng& rng, std::size_t counties, std::size_t hours,
                                             outage::LagConfig lag) {
  const auto p = random_panel(rng, counties, hours);
  std::vector<outage::CellRef> cells;
  for (std::size_t c = 0; c < counties; ++c)
    for (std::size_t h = lag.n; h < hours; ++h) cells.push_back({c, h});
  return outage::build_feature_matrix(p, cells, lag);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("outage_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture

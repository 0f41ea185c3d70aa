#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "outage/error.hpp"
#include "outage/impute.hpp"
#include "support.hpp"

using namespace outage;

TEST_CASE("nearest counties: pythagorean distances, ties by id") {
  const auto st = fixture::statics_at({{0, 0}, {3, 4}, {6, 8}});
  const auto t = nearest_counties(st);
  REQUIRE(t.neighbors[0].size() == 2);
  CHECK(t.neighbors[0][0] == Neighbor{1, 5.0});
  CHECK(t.neighbors[0][1] == Neighbor{2, 10.0});

  const auto same = nearest_counties(fixture::statics_at({{1, 1}, {1, 1}}));
  REQUIRE(same.neighbors[0].size() == 1);
  CHECK(same.neighbors[0][0].distance == 0.0);

  const auto tie = nearest_counties(fixture::statics_at({{0, 0}, {0, 1}, {1, 0}, {0, -1}}));
  CHECK(tie.neighbors[0][0].county == 1);
  CHECK(tie.neighbors[0][1].county == 2);
  CHECK(tie.neighbors[0][2].county == 3);

  CHECK_THROWS_AS(nearest_counties(fixture::statics_at({{0, 0}})), UserError);
}

TEST_CASE("neighbor lists exclude self and are sorted") {
  Rng rng = derive_rng(21, 0);
  const auto st = fixture::random_statics(rng, 15);
  const auto t = nearest_counties(st);
  for (std::size_t c = 0; c < st.size(); ++c) {
    CHECK(t.neighbors[c].size() == st.size() - 1);
    for (std::size_t i = 0; i < t.neighbors[c].size(); ++i) {
      CHECK(t.neighbors[c][i].county != c);
      if (i) CHECK(t.neighbors[c][i - 1].distance <= t.neighbors[c][i].distance);
    }
  }
}

namespace {

// County 0 at the origin, counties 1..5 at distance 1..5, county 6 far away.
PanelDataset line_panel() {
  PanelDataset p(fixture::statics_at({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {50, 0}}), fixture::t0(), 3);
  const double temps[] = {0, 60, 62, 64, 58, 56, 1000};
  for (std::size_t c = 0; c < 7; ++c)
    for (std::size_t h = 0; h < 3; ++h) {
      p.set_outage(c, h, 1.0, CellState::Present);
      for (std::size_t f = 0; f < kWeatherFields; ++f) p.set_weather(c, h, f, temps[c] + h, CellState::Present);
    }
  return p;
}

}  // namespace

TEST_CASE("missing cell takes the mean of the five nearest") {
  auto p = line_panel();
  p.set_weather(0, 1, kTemperature, 0.0, CellState::Missing);
  ImputeSummary s;
  const auto out = impute_missing(p, nearest_counties(p.all_statics()), {}, &s);
  CHECK(out.weather(0, 1, kTemperature) == 61.0);
  CHECK(out.weather_state(0, 1, kTemperature) == CellState::Imputed);
  CHECK(s.nearest == 1);
  CHECK(s.total() == 1);
}

TEST_CASE("missing neighbours are skipped, not counted") {
  auto p = line_panel();
  p.set_weather(0, 1, kTemperature, 0.0, CellState::Missing);
  p.set_weather(1, 1, kTemperature, 0.0, CellState::Missing);
  const auto out = impute_missing(p, nearest_counties(p.all_statics()));
  CHECK(out.weather(0, 1, kTemperature) == (63.0 + 65.0 + 59.0 + 57.0) / 4.0);
}

TEST_CASE("no missing cells leaves the panel unchanged") {
  const auto p = line_panel();
  CHECK(impute_missing(p, nearest_counties(p.all_statics())) == p);
}

TEST_CASE("fallback chain") {
  auto p = line_panel();
  const auto table = nearest_counties(p.all_statics());

  SUBCASE("widen to every county") {
    for (std::size_t c = 0; c < 6; ++c) p.set_weather(c, 1, kTemperature, 0.0, CellState::Missing);
    ImputeSummary s;
    const auto out = impute_missing(p, table, {}, &s);
    CHECK(out.weather(0, 1, kTemperature) == 1001.0);
    CHECK(s.widened == 6);
  }
  SUBCASE("interpolate in time") {
    for (std::size_t c = 0; c < 7; ++c) p.set_weather(c, 1, kTemperature, 0.0, CellState::Missing);
    ImputeSummary s;
    const auto out = impute_missing(p, table, {}, &s);
    CHECK(out.weather(3, 1, kTemperature) == 65.0);
    CHECK(s.interpolated == 7);
  }
  SUBCASE("county mean when only one side exists") {
    for (std::size_t c = 0; c < 7; ++c)
      for (std::size_t h = 1; h < 3; ++h) p.set_weather(c, h, kTemperature, 0.0, CellState::Missing);
    ImputeSummary s;
    const auto out = impute_missing(p, table, {}, &s);
    CHECK(out.weather(2, 2, kTemperature) == 62.0);
    CHECK(s.county_mean == 14);
  }
  SUBCASE("global mean as the last resort") {
    for (std::size_t h = 0; h < 3; ++h) p.set_weather(0, h, kTemperature, 0.0, CellState::Missing);
    for (std::size_t c = 1; c < 7; ++c)
      for (std::size_t h = 1; h < 3; ++h) p.set_weather(c, h, kTemperature, 0.0, CellState::Missing);
    // Hour 0: county 0 fills from neighbours. Hours 1-2 of county 0 have no
    // neighbour data, no own data, so they take the global mean of observations.
    ImputeSummary s;
    const auto out = impute_missing(p, table, {}, &s);
    const double global = (60 + 62 + 64 + 58 + 56 + 1000) / 6.0;
    CHECK(out.weather(0, 2, kTemperature) == doctest::Approx(global).epsilon(1e-15));
    CHECK(s.global_mean == 2);
  }
  SUBCASE("nothing observed anywhere is an error") {
    for (std::size_t c = 0; c < 7; ++c)
      for (std::size_t h = 0; h < 3; ++h) p.set_weather(c, h, kCloudCover, 0.0, CellState::Missing);
    CHECK_THROWS_WITH(impute_missing(p, table), doctest::Contains("cloud_cover"));
  }
}

TEST_CASE("targets are only imputed on request") {
  auto p = line_panel();
  p.set_outage(0, 1, 0.0, CellState::Missing);
  const auto table = nearest_counties(p.all_statics());
  CHECK_FALSE(impute_missing(p, table).has_outage(0, 1));
  const auto out = impute_missing(p, table, {5, true});
  CHECK(out.outage(0, 1) == 1.0);
  CHECK(out.outage_state(0, 1) == CellState::Imputed);
}

TEST_CASE("imputed inputs are neither sources nor overwritten") {
  auto p = line_panel();
  p.set_weather(1, 1, kTemperature, -500.0, CellState::Imputed);
  p.set_weather(0, 1, kTemperature, 0.0, CellState::Missing);
  const auto out = impute_missing(p, nearest_counties(p.all_statics()));
  CHECK(out.weather(1, 1, kTemperature) == -500.0);
  CHECK(out.weather(0, 1, kTemperature) == (63.0 + 65.0 + 59.0 + 57.0) / 4.0);
}

TEST_CASE("random panels: observed untouched, complete, equal to oracle") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng = derive_rng(seed, 77);
    const std::size_t counties = 2 + rng() % 12, hours = 5 + rng() % 60;
    const double missing = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
    const auto p = fixture::random_panel(rng, counties, hours, missing);
    const auto k = 1 + static_cast<std::size_t>(rng() % 6);
    const auto out = impute_missing(p, nearest_counties(p.all_statics()), {k, false});
    CHECK(out.missing_weather_cells() == 0);
    for (std::size_t c = 0; c < counties; ++c)
      for (std::size_t h = 0; h < hours; ++h)
        for (std::size_t f = 0; f < kWeatherFields; ++f)
          if (p.weather_state(c, h, f) == CellState::Present) CHECK(out.weather(c, h, f) == p.weather(c, h, f));
    CHECK(out == oracle::impute(p, k));
  }
}

TEST_CASE("mask and recover a smooth field") {
  // 6x6 grid of counties, f = 2*lat + 3*lon + 4*sin(hour).
  std::vector<std::pair<double, double>> coords;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) coords.emplace_back(42.0 + 0.3 * i, -86.0 + 0.3 * j);
  const std::size_t hours = 48;
  PanelDataset truth(fixture::statics_at(coords), fixture::t0(), hours);
  auto field = [&](std::size_t c, std::size_t h) {
    return 2.0 * coords[c].first + 3.0 * coords[c].second + 4.0 * std::sin(0.26 * static_cast<double>(h));
  };
  for (std::size_t c = 0; c < coords.size(); ++c)
    for (std::size_t h = 0; h < hours; ++h)
      for (std::size_t f = 0; f < kWeatherFields; ++f) truth.set_weather(c, h, f, field(c, h), CellState::Present);

  // Inter-county scale: mean absolute deviation across counties at a fixed hour.
  double mean = 0.0;
  for (std::size_t c = 0; c < coords.size(); ++c) mean += field(c, 0);
  mean /= static_cast<double>(coords.size());
  double scale = 0.0;
  for (std::size_t c = 0; c < coords.size(); ++c) scale += std::abs(field(c, 0) - mean);
  scale /= static_cast<double>(coords.size());

  Rng rng = derive_rng(99, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto masked = truth;
  std::size_t n = 0;
  for (std::size_t c = 0; c < coords.size(); ++c)
    for (std::size_t h = 0; h < hours; ++h)
      if (u(rng) < 0.1) {
        masked.set_weather(c, h, kTemperature, 0.0, CellState::Missing);
        ++n;
      }
  REQUIRE(n > 0);
  const auto out = impute_missing(masked, nearest_counties(masked.all_statics()));
  double mae = 0.0;
  for (std::size_t c = 0; c < coords.size(); ++c)
    for (std::size_t h = 0; h < hours; ++h)
      if (masked.weather_state(c, h, kTemperature) == CellState::Missing)
        mae += std::abs(out.weather(c, h, kTemperature) - truth.weather(c, h, kTemperature));
  mae /= static_cast<double>(n);
  CHECK(mae < scale);
}

#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "outage/error.hpp"
#include "outage/hilp.hpp"
#include "support.hpp"

using namespace outage;

namespace {

StormEvent storm(const std::string& id, const char* a, const char* b) { return {id, parse_utc(a), parse_utc(b), "x"}; }

/// One county, `hours` hours from `start`, outages = values, smooth random weather.
PanelDataset single_county(std::vector<double> outages, UtcTime start = fixture::t0(), std::uint64_t seed = 1) {
  Rng rng = derive_rng(seed, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PanelDataset p(fixture::statics_at({{42, -84}}), start, outages.size());
  for (std::size_t h = 0; h < outages.size(); ++h) {
    p.set_outage(0, h, outages[h], CellState::Present);
    for (std::size_t f = 0; f < kWeatherFields; ++f) p.set_weather(0, h, f, u(rng), CellState::Present);
  }
  return p;
}

}  // namespace

TEST_CASE("storm indicator uses closed intervals") {
  const std::vector<StormEvent> storms = {storm("A", "2020-06-06T10:00:00Z", "2020-06-06T14:00:00Z")};
  CHECK(weather_indicator(storms, "A", parse_utc("2020-06-06T12:00:00Z")) == 1);
  CHECK(weather_indicator(storms, "B", parse_utc("2020-06-06T12:00:00Z")) == 0);
  CHECK(weather_indicator(storms, "A", parse_utc("2020-06-06T14:00:00Z")) == 1);
  CHECK(weather_indicator(storms, "A", parse_utc("2020-06-06T10:00:00Z")) == 1);
  CHECK(weather_indicator(storms, "A", parse_utc("2020-06-06T15:00:00Z")) == 0);
}

TEST_CASE("nearest-rank quantile") {
  const std::vector<double> v = {50, 10, 90, 30, 70, 20, 100, 40, 80, 60};
  CHECK(nearest_rank_quantile(v, 0.7) == 70);
  CHECK(nearest_rank_quantile(v, 0.0) == 10);
  CHECK(nearest_rank_quantile(v, 1.0) == 100);
  for (double a : {0.0, 0.3, 0.7, 1.0}) CHECK(nearest_rank_quantile({42}, a) == 42);
  CHECK_THROWS(nearest_rank_quantile({}, 0.5));
  CHECK_THROWS(nearest_rank_quantile(v, 1.5));

  Rng rng = derive_rng(8, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(1 + rng() % 300);
    for (auto& x : xs) x = static_cast<double>(rng() % 50);
    const double a = std::uniform_real_distribution<double>(0, 1)(rng);
    CHECK(nearest_rank_quantile(xs, a) == oracle::nearest_rank(xs, a));
  }
}

TEST_CASE("seeds are storm hours at or above the quantile") {
  std::vector<double> y(24);
  for (std::size_t h = 0; h < 24; ++h) y[h] = static_cast<double>(h) * 10.0;
  const auto p = single_county(y);
  const std::vector<StormEvent> storms = {storm(p.county_id(0), "2020-01-01T05:00:00Z", "2020-01-01T14:00:00Z")};
  // Storm hours 5..14 carry 50..140; the 0.7 quantile is the 7th value, 110.
  CHECK(outage_quantile(p, storms, 0.7) == 110.0);
  const auto seeds = identify_seeds(p, storms, 0.7);
  REQUIRE(seeds.size() == 4);
  CHECK(seeds.front().cell.hour == 11);
  CHECK(seeds.back().cell.hour == 14);
  CHECK(seeds.front().y_value == 110.0);

  CHECK_THROWS(identify_seeds(p, {}, 0.7));
  CHECK_THROWS(outage_quantile(p, {}, 0.7));
}

TEST_CASE("ties at the threshold are all seeds") {
  const auto p = single_county(std::vector<double>(12, 500.0));
  const std::vector<StormEvent> storms = {storm(p.county_id(0), "2020-01-01T02:00:00Z", "2020-01-01T06:00:00Z")};
  CHECK(identify_seeds(p, storms, 0.7).size() == 5);
}

TEST_CASE("seed fraction stays within nearest-rank rounding") {
  Rng rng = derive_rng(12, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng() % 400;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i * 7919 % n);  // distinct
    std::shuffle(y.begin(), y.end(), rng);
    const auto p = single_county(y);
    const std::vector<StormEvent> storms = {{p.county_id(0), p.start(), p.end() - Hours{1}, "x"}};
    const double alpha = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const double frac = static_cast<double>(identify_seeds(p, storms, alpha).size()) / static_cast<double>(n);
    CHECK(frac >= 1.0 - alpha - 1e-12);
    CHECK(frac <= 1.0 - alpha + 1.0 / static_cast<double>(n) + 1e-12);
  }
}

TEST_CASE("seasonal candidates") {
  // Two calendar years of hours, offset 0 for readable month boundaries.
  const std::size_t hours = 366 * 24 + 365 * 24;
  const auto p = single_county(std::vector<double>(hours, 1.0));
  auto months_of = [&](const std::vector<CellRef>& cells) {
    std::set<int> m;
    for (const auto& c : cells) m.insert(local_month(p.time_at(c.hour), Hours{0}));
    return m;
  };
  const auto july = *p.hour_index(parse_utc("2020-07-15T12:00:00Z"));
  const auto jc = seasonal_candidates(p, {0, july}, 1, Hours{0});
  CHECK(months_of(jc) == std::set<int>{6, 7, 8});
  CHECK(jc.size() == static_cast<std::size_t>((30 + 31 + 31) * 24 * 2 - 1));

  const auto jan = *p.hour_index(parse_utc("2021-01-10T00:00:00Z"));
  const auto nc = seasonal_candidates(p, {0, jan}, 1, Hours{0});
  CHECK(months_of(nc) == std::set<int>{12, 1, 2});
  for (const auto& c : nc) CHECK(c.hour != jan);

  const auto month = single_county(std::vector<double>(24 * 10, 1.0), parse_utc("2020-03-05T10:00:00Z"));
  CHECK(seasonal_candidates(month, {0, 17}).size() == month.hour_count() - 1);
}

TEST_CASE("standardization") {
  std::vector<double> v;
  for (double x : {1.0, 2.0, 3.0})
    for (std::size_t f = 0; f < kWeatherFields; ++f) v.push_back(x * static_cast<double>(f + 1));
  const auto p = fit_standardization(v);
  CHECK(p.mu[0] == 2.0);
  CHECK(p.sigma[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));

  Rng rng = derive_rng(2, 0);
  std::vector<double> r(400 * kWeatherFields);
  for (auto& x : r) x = std::uniform_real_distribution<double>(-50, 80)(rng);
  const auto fit = fit_standardization(r);
  std::vector<double> z;
  for (std::size_t i = 0; i < 400; ++i) {
    const auto s = fit.standardize(std::span<const double>(r).subspan(i * kWeatherFields, kWeatherFields));
    z.insert(z.end(), s.begin(), s.end());
  }
  const auto refit = fit_standardization(z);
  for (std::size_t f = 0; f < kWeatherFields; ++f) {
    CHECK(std::abs(refit.mu[f]) < 1e-9);
    CHECK(std::abs(refit.sigma[f] - 1.0) < 1e-9);
  }

  for (std::size_t i = 0; i < 400; ++i) r[i * kWeatherFields + kCloudCover] = 55.0;
  CHECK_THROWS_WITH(fit_standardization(r), "zero variance: cloud_cover");
}

TEST_CASE("weather distance") {
  StandardizationParams unit;
  unit.sigma.fill(1.0);
  std::array<double, kWeatherFields> a{}, b{};
  CHECK(weather_distance(a, a, unit) == 0.0);
  b[0] = 1.0;
  CHECK(weather_distance(b, a, unit) == 1.0);
  Rng rng = derive_rng(3, 0);
  StandardizationParams p;
  for (std::size_t f = 0; f < kWeatherFields; ++f) {
    p.mu[f] = std::uniform_real_distribution<double>(-5, 5)(rng);
    p.sigma[f] = std::uniform_real_distribution<double>(0.5, 5)(rng);
  }
  for (int i = 0; i < 100; ++i) {
    for (auto& x : a) x = std::uniform_real_distribution<double>(-5, 5)(rng);
    for (auto& x : b) x = std::uniform_real_distribution<double>(-5, 5)(rng);
    CHECK(weather_distance(a, b, p) == weather_distance(b, a, p));
  }
}

TEST_CASE("select_analogs orders by distance") {
  PanelDataset p(fixture::statics_at({{42, -84}}), parse_utc("2020-07-01T12:00:00Z"), 4);
  const double first[] = {0.0, 0.5, 0.2, 0.9};
  for (std::size_t h = 0; h < 4; ++h) {
    p.set_outage(0, h, 1.0, CellState::Present);
    for (std::size_t f = 0; f < kWeatherFields; ++f) p.set_weather(0, h, f, f == 0 ? first[h] : 0.0, CellState::Present);
  }
  StandardizationParams unit;
  unit.sigma.fill(1.0);
  const HilpSeed seed{p.county_id(0), p.time_at(0), 1.0, {0, 0}};
  const auto two = select_analogs(seed, 2, p, unit);
  REQUIRE(two.size() == 2);
  CHECK(two[0].cell.hour == 2);
  CHECK(two[1].cell.hour == 1);
  CHECK(two[0].distance == doctest::Approx(0.2));
  CHECK(select_analogs(seed, 10, p, unit).size() == 3);

  // An exact copy of the seed vector ranks first; equal distances go to the earlier hour.
  for (std::size_t f = 0; f < kWeatherFields; ++f) p.set_weather(0, 3, f, 0.0, CellState::Present);
  p.set_weather(0, 1, 0, 0.0, CellState::Present);
  const auto exact = select_analogs(seed, 3, p, unit);
  CHECK(exact[0].cell.hour == 1);
  CHECK(exact[1].cell.hour == 3);
  CHECK(exact[0].distance == 0.0);
}

namespace {

PanelDataset storm_panel(std::uint64_t seed, std::size_t counties, std::size_t hours, std::vector<StormEvent>& storms) {
  Rng rng = derive_rng(seed, 0);
  auto p = fixture::random_panel(rng, counties, hours);
  storms.clear();
  for (std::size_t c = 0; c < counties; ++c)
    for (int s = 0; s < 3; ++s) {
      const std::size_t h0 = rng() % (hours - 20);
      storms.push_back({p.county_id(c), p.time_at(h0), p.time_at(h0 + 5 + rng() % 10), "x"});
    }
  return p;
}

}  // namespace

TEST_CASE("analogs match an exhaustive sort and stay in the seed county") {
  std::vector<StormEvent> storms;
  const auto p = storm_panel(5, 5, 2000, storms);
  const HilpConfig cfg;
  const auto params = fit_standardization(p);
  const auto seeds = identify_seeds(p, storms, 0.7);
  REQUIRE(!seeds.empty());
  for (std::size_t i = 0; i < seeds.size(); i += 7) {
    const auto got = select_analogs(seeds[i], 10, p, params, cfg);
    std::vector<std::pair<double, std::size_t>> all;
    const auto seed_z = params.standardize(p.weather_vector(seeds[i].cell.county, seeds[i].cell.hour));
    for (std::size_t h = 0; h < p.hour_count(); ++h) {
      if (h == seeds[i].cell.hour) continue;
      const int m = local_month(p.time_at(h), cfg.utc_offset), sm = local_month(seeds[i].t_ex, cfg.utc_offset);
      const int diff = std::min((m - sm + 12) % 12, (sm - m + 12) % 12);
      if (diff > 1) continue;
      const auto z = params.standardize(p.weather_vector(seeds[i].cell.county, h));
      double d = 0;
      for (std::size_t f = 0; f < kWeatherFields; ++f) d += (z[f] - seed_z[f]) * (z[f] - seed_z[f]);
      all.emplace_back(d, h);
    }
    std::sort(all.begin(), all.end());
    REQUIRE(got.size() == 10);
    for (std::size_t j = 0; j < got.size(); ++j) {
      CHECK(got[j].cell.county == seeds[i].cell.county);
      CHECK(got[j].cell.hour == all[j].second);
    }
  }
}

TEST_CASE("analog choice survives per-feature affine rescaling") {
  std::vector<StormEvent> storms;
  const auto p = storm_panel(6, 3, 900, storms);
  auto scaled = p;
  const double a[] = {2.0, 0.5, 10.0, 3.0, 1.5, 7.0, 0.25, 4.0};
  for (std::size_t c = 0; c < p.county_count(); ++c)
    for (std::size_t h = 0; h < p.hour_count(); ++h)
      for (std::size_t f = 0; f < kWeatherFields; ++f)
        scaled.set_weather(c, h, f, a[f] * p.weather(c, h, f) + 3.0 * static_cast<double>(f), CellState::Present);
  const auto s1 = build_extreme_set(p, storms);
  const auto s2 = build_extreme_set(scaled, storms);
  CHECK(s1.cells() == s2.cells());
}

TEST_CASE("extreme set union") {
  std::vector<StormEvent> storms;
  const auto p = storm_panel(7, 3, 800, storms);
  HilpConfig none;
  none.analogs_per_seed = 0;
  const auto seeds_only = build_extreme_set(p, storms, none);
  CHECK(seeds_only.entries.size() == seeds_only.seeds.size());

  const auto full = build_extreme_set(p, storms);
  std::set<CellRef> expect;
  for (const auto& s : full.seeds) expect.insert(s.cell);
  for (const auto& list : full.analogs) {
    CHECK(list.size() <= 10);
    for (const auto& a : list) expect.insert(a.cell);
  }
  const auto cells = full.cells();
  CHECK(std::set<CellRef>(cells.begin(), cells.end()) == expect);
  CHECK(cells.size() == full.entries.size());

  std::stringstream s;
  write_extreme_set_csv(s, full, p);
  fixture::TempDir dir("hilp");
  fixture::spit(dir / "e.csv", s.str());
  const auto back = read_extreme_set_csv(dir / "e.csv", p);
  CHECK(back.entries == full.entries);
}

TEST_CASE("disjoint and shared analog counts") {
  // One county in one month; two seeds far apart in weather space.
  PanelDataset p(fixture::statics_at({{42, -84}}), parse_utc("2020-07-01T12:00:00Z"), 40);
  for (std::size_t h = 0; h < 40; ++h) {
    p.set_outage(0, h, h == 0 || h == 20 ? 1000.0 : 1.0, CellState::Present);
    const double base = h < 20 ? 0.0 : 100.0;
    for (std::size_t f = 0; f < kWeatherFields; ++f)
      p.set_weather(0, h, f, base + static_cast<double>(h % 20) + 0.01 * static_cast<double>(f), CellState::Present);
  }
  const std::vector<StormEvent> storms = {{p.county_id(0), p.time_at(0), p.time_at(0), "x"},
                                          {p.county_id(0), p.time_at(20), p.time_at(20), "x"}};
  HilpConfig cfg;
  cfg.analogs_per_seed = 3;
  const auto set = build_extreme_set(p, storms, cfg);
  REQUIRE(set.seeds.size() == 2);
  CHECK(set.entries.size() == 8);

  // Seeds with identical weather share their analogs.
  for (std::size_t f = 0; f < kWeatherFields; ++f) p.set_weather(0, 20, f, p.weather(0, 0, f), CellState::Present);
  const auto shared = build_extreme_set(p, storms, cfg);
  CHECK(shared.entries.size() < 8);
}

TEST_CASE("daily aggregation gives one vector per local day") {
  Rng rng = derive_rng(1, 0);
  const auto p = fixture::random_panel(rng, 2, 72);
  const auto v = weather_vectors(p, WeatherAggregation::Daily, Hours{-5});
  for (std::size_t h = 1; h < 72; ++h)
    if (local_day(p.time_at(h), Hours{-5}) == local_day(p.time_at(h - 1), Hours{-5}))
      for (std::size_t f = 0; f < kWeatherFields; ++f) CHECK(v[h * kWeatherFields + f] == v[(h - 1) * kWeatherFields + f]);
}

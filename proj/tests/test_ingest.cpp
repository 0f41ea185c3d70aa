#include <sstream>

#include "doctest.h"
#include "outage/error.hpp"
#include "outage/ingest.hpp"
#include "support.hpp"

using namespace outage;

namespace {

std::vector<OutageRecord> quarters(const std::string& id, const std::string& hour, std::vector<std::int64_t> v) {
  std::vector<OutageRecord> out;
  const auto t = parse_utc(hour);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] >= 0) out.push_back({id, t + std::chrono::minutes{15 * static_cast<long long>(i)}, v[i]});
  return out;
}

}  // namespace

TEST_CASE("outage csv: single row, header only, bad rows") {
  fixture::TempDir dir("ingest");
  fixture::spit(dir / "one.csv", "county_id,timestamp_utc,customers_out\n26163,2020-06-06T14:15:00Z,1200\n");
  const auto one = parse_outage_csv(dir / "one.csv");
  REQUIRE(one.size() == 1);
  CHECK(one[0].county_id == "26163");
  CHECK(one[0].customers_out == 1200);
  CHECK(format_utc(one[0].timestamp) == "2020-06-06T14:15:00Z");

  fixture::spit(dir / "empty.csv", "county_id,timestamp_utc,customers_out\n");
  CHECK(parse_outage_csv(dir / "empty.csv").empty());

  fixture::spit(dir / "neg.csv", "county_id,timestamp_utc,customers_out\n26163,2020-06-06T14:15:00Z,-5\n");
  try {
    parse_outage_csv(dir / "neg.csv");
    FAIL("negative count accepted");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.field() == "customers_out");
  }

  fixture::spit(dir / "dup.csv",
                "county_id,timestamp_utc,customers_out\n26163,2020-06-06T14:15:00Z,1\n26163,2020-06-06T14:15:00Z,2\n");
  try {
    parse_outage_csv(dir / "dup.csv");
    FAIL("duplicate accepted");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }

  fixture::spit(dir / "ts.csv", "county_id,timestamp_utc,customers_out\n26163,2020-06-06 14:15,1\n");
  CHECK_THROWS_AS(parse_outage_csv(dir / "ts.csv"), ParseError);
  fixture::spit(dir / "off.csv", "county_id,timestamp_utc,customers_out\n26163,2020-06-06T14:10:00Z,1\n");
  CHECK_THROWS_AS(parse_outage_csv(dir / "off.csv"), ParseError);
  fixture::spit(dir / "hdr.csv", "county,timestamp_utc,customers_out\n");
  CHECK_THROWS(parse_outage_csv(dir / "hdr.csv"));
}

TEST_CASE("outage records come back sorted by county then time") {
  fixture::TempDir dir("ingest");
  fixture::spit(dir / "o.csv",
                "county_id,timestamp_utc,customers_out\n"
                "26002,2020-01-01T00:15:00Z,3\n26001,2020-01-01T00:30:00Z,2\n26001,2020-01-01T00:00:00Z,1\n");
  const auto r = parse_outage_csv(dir / "o.csv");
  REQUIRE(r.size() == 3);
  CHECK(r[0].customers_out == 1);
  CHECK(r[1].customers_out == 2);
  CHECK(r[2].customers_out == 3);
}

TEST_CASE("weather csv: optional cells and range checks") {
  fixture::TempDir dir("ingest");
  const std::string header =
      "county_id,timestamp_utc,temp_f,precip_in,wind_kmh,gust_kmh,swr_wm2,rh_pct,cloud_pct,pressure_hpa\n";
  fixture::spit(dir / "w.csv", header + "26001,2020-01-01T00:00:00Z,30.5,,10,12,0,80,90,1010\n");
  const auto w = parse_weather_csv(dir / "w.csv");
  REQUIRE(w.size() == 1);
  CHECK(*w[0].values[kTemperature] == 30.5);
  CHECK_FALSE(w[0].values[kPrecipitation].has_value());

  fixture::spit(dir / "rh.csv", header + "26001,2020-01-01T00:00:00Z,30.5,0,10,12,0,101,90,1010\n");
  CHECK_THROWS_AS(parse_weather_csv(dir / "rh.csv"), ParseError);
  fixture::spit(dir / "pr.csv", header + "26001,2020-01-01T00:00:00Z,30.5,-0.1,10,12,0,50,90,1010\n");
  CHECK_THROWS_AS(parse_weather_csv(dir / "pr.csv"), ParseError);
  fixture::spit(dir / "q.csv", header + "26001,2020-01-01T00:15:00Z,30.5,0,10,12,0,50,90,1010\n");
  CHECK_THROWS_AS(parse_weather_csv(dir / "q.csv"), ParseError);
}

TEST_CASE("storm csv rejects reversed intervals") {
  fixture::TempDir dir("ingest");
  fixture::spit(dir / "s.csv",
                "county_id,start_utc,end_utc,event_type\n26001,2020-01-01T05:00:00Z,2020-01-01T04:00:00Z,Flood\n");
  CHECK_THROWS_AS(parse_storm_events_csv(dir / "s.csv"), ParseError);
}

TEST_CASE("resample takes the hourly maximum") {
  auto r = quarters("A", "2020-01-01T00:00:00Z", {100, 250, 180, 90});
  const auto second = quarters("A", "2020-01-01T01:00:00Z", {7});
  const auto fourth = quarters("A", "2020-01-01T03:00:00Z", {-1, 4, -1, -1});
  r.insert(r.end(), second.begin(), second.end());
  r.insert(r.end(), fourth.begin(), fourth.end());
  const auto s = resample_outages_hourly(r);
  REQUIRE(s.size() == 1);
  REQUIRE(s[0].values.size() == 4);
  CHECK(*s[0].values[0] == 250);
  CHECK(*s[0].values[1] == 7);
  CHECK_FALSE(s[0].values[2].has_value());
  CHECK(*s[0].values[3] == 4);
}

TEST_CASE("resample is idempotent on hourly maxima") {
  Rng rng = derive_rng(5, 0);
  std::vector<OutageRecord> r;
  for (int h = 0; h < 50; ++h)
    for (int q = 0; q < 4; ++q)
      r.push_back({"B", parse_utc("2020-03-01T00:00:00Z") + Hours{h} + std::chrono::minutes{15 * q},
                   static_cast<std::int64_t>(rng() % 1000)});
  const auto once = resample_outages_hourly(r);
  std::vector<OutageRecord> hourly;
  for (std::size_t i = 0; i < once[0].values.size(); ++i)
    hourly.push_back({"B", once[0].start + Hours{static_cast<long long>(i)}, *once[0].values[i]});
  const auto twice = resample_outages_hourly(hourly);
  CHECK(twice[0].values == once[0].values);
  CHECK(twice[0].start == once[0].start);
}

TEST_CASE("infrastructure shares") {
  std::vector<InfrastructureRecord> two = {{"A", {1, 30, 1, 1, 1}}, {"B", {1, 70, 1, 1, 1}}};
  const auto s = normalize_infrastructure(two);
  CHECK(s[0][1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s[1][1] == doctest::Approx(0.7).epsilon(1e-15));

  std::vector<InfrastructureRecord> one = {{"A", {3, 4, 5, 6, 7}}};
  const auto single = normalize_infrastructure(one);
  for (double v : single[0]) CHECK(v == 1.0);

  std::vector<InfrastructureRecord> zero = {{"A", {1, 1, 0, 1, 1}}, {"B", {1, 1, 0, 1, 1}}};
  CHECK_THROWS_WITH(normalize_infrastructure(zero), "zero column: substations");

  Rng rng = derive_rng(11, 0);
  std::vector<InfrastructureRecord> many;
  for (int i = 0; i < 83; ++i) {
    InfrastructureRecord r{fixture::county_name(static_cast<std::size_t>(i)), {}};
    for (auto& c : r.counts) c = static_cast<std::int64_t>(rng() % 5000);
    many.push_back(r);
  }
  const auto shares = normalize_infrastructure(many);
  for (std::size_t k = 0; k < kInfraCategories; ++k) {
    double sum = 0.0;
    for (const auto& row : shares) sum += row[k];
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("statics join requires matching county sets") {
  std::vector<CensusRecord> census(2);
  census[0].county_id = "A";
  census[1].county_id = "B";
  std::vector<InfrastructureRecord> infra = {{"A", {1, 1, 1, 1, 1}}};
  CHECK_THROWS(assemble_statics(census, infra));
  infra.push_back({"B", {1, 3, 1, 1, 1}});
  const auto st = assemble_statics(census, infra);
  REQUIRE(st.size() == 2);
  CHECK(st[1].infra_shares[1] == 0.75);
}

TEST_CASE("build_panel: complete, single gap, unknown county") {
  const auto statics = fixture::statics_at({{42.0, -84.0}, {43.0, -85.0}});
  const auto start = fixture::t0();
  std::vector<HourlySeries> outages;
  std::vector<WeatherRecord> weather;
  for (std::size_t c = 0; c < 2; ++c) {
    HourlySeries s{statics[c].county_id, start, {}};
    for (int h = 0; h < 48; ++h) {
      s.values.push_back(h);
      WeatherRecord w{statics[c].county_id, start + Hours{h}, {}};
      for (auto& v : w.values) v = 1.0;
      if (c == 1 && h == 10) w.values[kWindSpeed].reset();
      weather.push_back(w);
    }
    outages.push_back(s);
  }
  const auto panel = build_panel(outages, weather, statics, {start, start + Hours{48}});
  CHECK(panel.cell_count() == 96);
  CHECK(panel.missing_outage_cells() == 0);
  CHECK(panel.missing_weather_cells() == 1);
  CHECK_FALSE(panel.has_weather(1, 10, kWindSpeed));

  outages.push_back({"99999", start, {1}});
  CHECK_THROWS_WITH(build_panel(outages, weather, statics, {start, start + Hours{48}}),
                    doctest::Contains("99999"));
}

TEST_CASE("panel csv round trip is exact") {
  Rng rng = derive_rng(3, 0);
  auto panel = fixture::random_panel(rng, 4, 30, 0.1);
  panel.set_outage(2, 5, 17.25, CellState::Imputed);
  panel.set_weather(1, 3, kPressure, 0.1 + 0.2, CellState::Imputed);
  panel.set_outage(0, 0, 0.0, CellState::Missing);
  std::stringstream s;
  write_panel_csv(s, panel);
  const auto back = read_panel_csv(s, panel.all_statics());
  CHECK(back == panel);
}

TEST_CASE("statics csv round trip") {
  Rng rng = derive_rng(4, 0);
  const auto st = fixture::random_statics(rng, 6);
  fixture::TempDir dir("ingest");
  {
    std::ofstream out(dir / "s.csv");
    write_statics_csv(out, st);
  }
  CHECK(read_statics_csv(dir / "s.csv") == st);
}

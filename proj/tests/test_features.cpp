#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "outage/error.hpp"
#include "outage/features.hpp"
#include "outage/graph.hpp"
#include "outage/scaler.hpp"
#include "support.hpp"

using namespace outage;

TEST_CASE("column layout") {
  const auto cols = feature_columns({2, true});
  CHECK(cols.size() == 2 + 3 * 8 + 10 + 12);
  CHECK(cols[0] == "y_lag1");
  CHECK(cols[1] == "y_lag2");
  CHECK(cols[2] == "temp_f_lag0");
  CHECK(cols[2 + 8] == "temp_f_lag1");
  CHECK(cols.back() == "month_12");
  CHECK(feature_columns({2, false}).size() == 2 + 2 * 8 + 10 + 12);
  CHECK(feature_columns({2, false})[2] == "temp_f_lag1");
  CHECK_THROWS(feature_columns({0, true}));
}

TEST_CASE("outage lags, dropped rows and the month one-hot") {
  PanelDataset p(fixture::statics_at({{42, -84}}), parse_utc("2020-07-10T00:00:00Z"), 5);
  const double y[] = {10, 80, 50, 7, 9};
  for (std::size_t h = 0; h < 5; ++h) {
    p.set_outage(0, h, y[h], CellState::Present);
    for (std::size_t f = 0; f < kWeatherFields; ++f)
      p.set_weather(0, h, f, static_cast<double>(10 * h + f), CellState::Present);
  }
  const LagConfig lag{2, true};
  const std::vector<CellRef> cells = {{0, 0}, {0, 1}, {0, 3}};
  const auto m = build_feature_matrix(p, cells, lag);
  CHECK(m.rows() == 1);
  CHECK(m.dropped == 2);
  CHECK(m.values(0, 0) == 50.0);
  CHECK(m.values(0, 1) == 80.0);
  CHECK(m.target[0] == 7.0);
  CHECK(m.values(0, m.column_index("temp_f_lag0")) == 30.0);
  CHECK(m.values(0, m.column_index("precip_in_lag2")) == 11.0);
  double ones = 0.0;
  for (int mo = 1; mo <= 12; ++mo) {
    char name[16];
    std::snprintf(name, sizeof name, "month_%02d", mo);
    ones += m.values(0, m.column_index(name));
  }
  CHECK(ones == 1.0);
  CHECK(m.values(0, m.column_index("month_07")) == 1.0);

  const std::vector<CellRef> early = {{0, 0}};
  CHECK_THROWS(build_feature_matrix(p, early, lag));
}

TEST_CASE("missing target or history drops the row") {
  Rng rng = derive_rng(1, 0);
  auto p = fixture::random_panel(rng, 1, 10);
  p.set_outage(0, 5, 0.0, CellState::Missing);
  CHECK_FALSE(feature_row(p, {0, 5}, {2, true}));
  CHECK_FALSE(feature_row(p, {0, 6}, {2, true}));
  CHECK_FALSE(feature_row(p, {0, 7}, {2, true}));
  CHECK(feature_row(p, {0, 8}, {2, true}));
  p.set_weather(0, 8, kWindGust, 0.0, CellState::Missing);
  CHECK_FALSE(feature_row(p, {0, 8}, {2, true}));
  CHECK(feature_row(p, {0, 8}, {2, false}));
}

TEST_CASE("rows never read the future") {
  Rng rng = derive_rng(44, 0);
  const auto base = fixture::random_panel(rng, 3, 60);
  const LagConfig lag{6, true};
  for (int trial = 0; trial < 200; ++trial) {
    const CellRef cell{rng() % 3, 6 + rng() % 50};
    const auto before = feature_row(base, cell, lag);
    REQUIRE(before);
    auto p = base;
    for (std::size_t h = cell.hour + 1; h < p.hour_count(); ++h)
      for (std::size_t c = 0; c < p.county_count(); ++c) {
        p.set_outage(c, h, -1.0, CellState::Present);
        for (std::size_t f = 0; f < kWeatherFields; ++f) p.set_weather(c, h, f, 1e9, CellState::Present);
      }
    CHECK(*feature_row(p, cell, lag) == *before);
  }
}

TEST_CASE("min-max scaler") {
  MinMaxScaler s;
  const std::vector<double> col = {10, 20, 30};
  CHECK_THROWS_WITH(s.invert(0.5), "min-max scaler used before fit");
  s.fit(col);
  CHECK(s.apply(10.0) == 0.0);
  CHECK(s.apply(20.0) == 0.5);
  CHECK(s.apply(30.0) == 1.0);
  CHECK(s.apply(40.0) == 1.5);
  CHECK(s.invert(0.5) == 20.0);

  Matrix m(3, 2);
  m(0, 0) = 1;
  m(1, 0) = 5;
  m(2, 0) = 3;
  m(0, 1) = m(1, 1) = m(2, 1) = 7;
  MinMaxScaler ms;
  ms.fit(m);
  CHECK(ms.constant(1));
  const auto scaled = ms.apply(m);
  CHECK(scaled(1, 0) == 1.0);
  CHECK(scaled(0, 0) == 0.0);
  CHECK(scaled(2, 1) == 0.0);

  Rng rng = derive_rng(9, 0);
  Matrix r(200, 5);
  for (auto& v : r.data) v = std::uniform_real_distribution<double>(-1e3, 1e3)(rng);
  MinMaxScaler rs;
  rs.fit(r);
  const auto back = rs.invert(rs.apply(r));
  for (std::size_t i = 0; i < r.data.size(); ++i) CHECK(std::abs(back.data[i] - r.data[i]) < 1e-9);
  const auto sc = rs.apply(r);
  for (std::size_t c = 0; c < 5; ++c) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < 200; ++i) {
      lo = std::min(lo, sc(i, c));
      hi = std::max(hi, sc(i, c));
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
  }
}

TEST_CASE("feature csv round trip") {
  Rng rng = derive_rng(2, 0);
  const auto p = fixture::random_panel(rng, 2, 30);
  std::vector<CellRef> cells;
  for (std::size_t h = 0; h < 30; ++h) cells.push_back({h % 2, h});
  const LagConfig lag{4, false};
  const auto m = build_feature_matrix(p, cells, lag);
  fixture::TempDir dir("features");
  {
    std::ofstream out(dir / "f.csv");
    write_feature_csv(out, m);
  }
  const auto back = read_feature_csv(dir / "f.csv", lag);
  CHECK(back.values == m.values);
  CHECK(back.target == m.target);
  CHECK(back.keys == m.keys);
  CHECK_THROWS(read_feature_csv(dir / "f.csv", LagConfig{3, false}));
}

TEST_CASE("held-out event filtering uses the lag window") {
  const HeldOutEvent e{"ev", "A", parse_utc("2020-06-06T10:00:00Z"), parse_utc("2020-06-06T12:00:00Z")};
  auto at = [](const char* county, const char* t) { return RowKey{county, parse_utc(t)}; };
  CHECK(touches_event(at("A", "2020-06-06T11:00:00Z"), e, 3));
  CHECK(touches_event(at("A", "2020-06-06T15:00:00Z"), e, 3));
  CHECK_FALSE(touches_event(at("A", "2020-06-06T16:00:00Z"), e, 3));
  CHECK_FALSE(touches_event(at("A", "2020-06-06T09:00:00Z"), e, 3));
  CHECK_FALSE(touches_event(at("B", "2020-06-06T11:00:00Z"), e, 3));
}

TEST_CASE("sequence layout puts the oldest step first") {
  Rng rng = derive_rng(3, 0);
  const auto p = fixture::random_panel(rng, 1, 10);
  const LagConfig lag{3, true};
  const std::vector<CellRef> cells = {{0, 9}};
  const auto m = build_feature_matrix(p, cells, lag);
  const auto layout = SequenceLayout::from(m);
  CHECK(layout.steps == 3);
  CHECK(layout.step_width == 1 + 8 + 10 + 12);
  std::vector<double> seq(layout.steps * layout.step_width);
  gather_sequence(layout, m.values.row(0), seq);
  CHECK(seq[0] == p.outage(0, 6));
  CHECK(seq[1] == p.weather(0, 7, 0));
  CHECK(seq[2 * layout.step_width] == p.outage(0, 8));
  CHECK(seq[2 * layout.step_width + 1] == p.weather(0, 9, 0));
}

TEST_CASE("graph edges") {
  // Counties 1 and 2 sit about 30 miles north and 80 miles south of county 0.
  const auto st = fixture::statics_at({{42.0, -84.0}, {42.0 + 30.0 / 69.09, -84.0}, {42.0 - 80.0 / 69.09, -84.0}});
  CHECK(haversine_miles(42.0, -84.0, 42.0 + 30.0 / 69.09, -84.0) == doctest::Approx(30.0).epsilon(0.01));
  PanelDataset p(st, fixture::t0(), 6);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t h = 0; h < 6; ++h)
      for (std::size_t f = 0; f < kWeatherFields; ++f) p.set_weather(c, h, f, static_cast<double>(c + h), CellState::Present);
  const auto g = build_graph(p);
  REQUIRE(g.spatial_pairs.size() == 1);
  CHECK(g.spatial_pairs[0].a == 0);
  CHECK(g.spatial_pairs[0].b == 1);
  for (const auto& pr : g.spatial_pairs) CHECK_FALSE((pr.a == 0 && pr.b == 2));
  CHECK(g.spatial_edge_count() == 6);
  CHECK(g.temporal_edge_count() == 3 * 5);
  const auto te = g.temporal_edges();
  CHECK(te.size() == 15);
  for (const auto& [a, b] : te) CHECK(b == a + 1);
  for (const auto& [a, b] : g.spatial_edges()) {
    CHECK(a < b);
    CHECK(a % 6 == b % 6);
  }
  CHECK(g.node_count() == 18);
  for (double v : g.node_features.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("graph matches the all-pairs oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = derive_rng(seed, 3);
    const auto p = fixture::random_panel(rng, 20, 4);
    const auto g = build_graph(p, 50.0);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& pr : g.spatial_pairs) got.insert({pr.a, pr.b});
    CHECK(got == oracle::county_pairs_within(p.all_statics(), 50.0));
  }
}

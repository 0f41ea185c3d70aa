#include "outage/graph.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "outage/csv.hpp"
#include "outage/scaler.hpp"

namespace outage {

double haversine_miles(double lat1, double lon1, double lat2, double lon2) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double s = std::sin(dlat / 2);
  const double t = std::sin(dlon / 2);
  const double a = s * s + std::cos(lat1 * rad) * std::cos(lat2 * rad) * t * t;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<std::pair<std::size_t, std::size_t>> SpatioTemporalGraph::spatial_edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(spatial_edge_count());
  for (std::size_t h = 0; h < hours; ++h)
    for (const auto& p : spatial_pairs) out.emplace_back(node_id(p.a, h), node_id(p.b, h));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> SpatioTemporalGraph::temporal_edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(temporal_edge_count());
  for (std::size_t c = 0; c < counties; ++c)
    for (std::size_t h = 0; h + 1 < hours; ++h) out.emplace_back(node_id(c, h), node_id(c, h + 1));
  return out;
}

SpatioTemporalGraph build_graph(const PanelDataset& panel, double radius_miles) {
  SpatioTemporalGraph g;
  g.counties = panel.county_count();
  g.hours = panel.hour_count();
  for (std::size_t a = 0; a < g.counties; ++a)
    for (std::size_t b = a + 1; b < g.counties; ++b) {
      const auto& sa = panel.statics(a);
      const auto& sb = panel.statics(b);
      const double d = haversine_miles(sa.latitude, sa.longitude, sb.latitude, sb.longitude);
      if (d <= radius_miles) g.spatial_pairs.push_back({a, b, d});
    }

  for (auto w : kWeatherColumns) g.feature_names.emplace_back(w);
  g.feature_names.insert(g.feature_names.end(), {"income_usd", "unemployment_pct"});
  for (auto b : kBuildingAgeColumns) g.feature_names.emplace_back(b);
  for (auto k : kInfraNames) g.feature_names.push_back("share_" + std::string(k));

  Matrix raw(g.node_count(), g.feature_names.size());
  for (std::size_t c = 0; c < g.counties; ++c) {
    const auto& s = panel.statics(c);
    for (std::size_t h = 0; h < g.hours; ++h) {
      auto row = raw.row(g.node_id(c, h));
      const auto w = panel.weather_vector(c, h);
      std::copy(w.begin(), w.end(), row.begin());
      std::size_t j = kWeatherFields;
      row[j++] = s.avg_household_income;
      row[j++] = s.unemployment_rate;
      for (double b : s.building_age_distribution) row[j++] = b;
      for (double v : s.infra_shares) row[j++] = v;
    }
  }
  if (raw.rows > 0) {
    MinMaxScaler scaler;
    scaler.fit(raw);
    g.node_features = scaler.apply(raw);
  } else {
    g.node_features = std::move(raw);
  }
  return g;
}

void write_graph_nodes_csv(std::ostream& out, const SpatioTemporalGraph& g, const PanelDataset& panel) {
  std::vector<std::string> header = {"node_id", "county_id", "timestamp_utc"};
  header.insert(header.end(), g.feature_names.begin(), g.feature_names.end());
  csv::write_row(out, header);
  std::vector<std::string> f(header.size());
  for (std::size_t c = 0; c < g.counties; ++c)
    for (std::size_t h = 0; h < g.hours; ++h) {
      const std::size_t id = g.node_id(c, h);
      f[0] = std::to_string(id);
      f[1] = panel.county_id(c);
      f[2] = format_utc(panel.time_at(h));
      for (std::size_t j = 0; j < g.feature_names.size(); ++j) f[3 + j] = csv::format_double(g.node_features(id, j));
      csv::write_row(out, f);
    }
}

void write_graph_edges_csv(std::ostream& out, const SpatioTemporalGraph& g) {
  csv::write_row(out, {"source", "target", "kind"});
  for (const auto& [a, b] : g.spatial_edges()) out << a << ',' << b << ",spatial\n";
  for (const auto& [a, b] : g.temporal_edges()) out << a << ',' << b << ",temporal\n";
}

}  // namespace outage

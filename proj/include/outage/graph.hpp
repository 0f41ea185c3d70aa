#pragma once

// Spatio-temporal county graph: one node per (county, hour), spatial edges
// between counties within a haversine radius at the same hour, and temporal
// edges along each county's hourly chain.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "outage/ingest.hpp"
#include "outage/matrix.hpp"

namespace outage {

inline constexpr double kEarthRadiusMiles = 3958.8;

double haversine_miles(double lat1, double lon1, double lat2, double lon2);

struct CountyPair {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double miles = 0.0;
};

struct SpatioTemporalGraph {
  std::size_t counties = 0;
  std::size_t hours = 0;
  std::vector<CountyPair> spatial_pairs;  // replicated at every hour
  std::vector<std::string> feature_names;
  Matrix node_features;  // node id = county * hours + hour, min-max scaled

  std::size_t node_id(std::size_t county, std::size_t hour) const noexcept { return county * hours + hour; }
  std::size_t node_count() const noexcept { return counties * hours; }
  std::size_t spatial_edge_count() const noexcept { return spatial_pairs.size() * hours; }
  std::size_t temporal_edge_count() const noexcept { return hours == 0 ? 0 : counties * (hours - 1); }

  /// Undirected (lower id, higher id) node pairs.
  std::vector<std::pair<std::size_t, std::size_t>> spatial_edges() const;
  /// Directed (c, t_i) -> (c, t_{i+1}).
  std::vector<std::pair<std::size_t, std::size_t>> temporal_edges() const;
};

/// Node features are the hour's weather vector and the county statics, min-max
/// scaled over all nodes. Missing weather cells contribute 0 before scaling.
SpatioTemporalGraph build_graph(const PanelDataset& panel, double radius_miles = 50.0);

/// nodes CSV: node_id,county_id,timestamp_utc,<features>; edges CSV: source,target,kind.
void write_graph_nodes_csv(std::ostream& out, const SpatioTemporalGraph& g, const PanelDataset& panel);
void write_graph_edges_csv(std::ostream& out, const SpatioTemporalGraph& g);

}  // namespace outage

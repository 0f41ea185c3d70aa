#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "outage/ingest.hpp"

namespace outage {

struct Neighbor {
  std::size_t county = 0;  // index into the table's county order
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

/// For each county, every other county ordered by raw-coordinate Euclidean
/// distance (ties by county id).
struct NeighborTable {
  std::vector<std::string> county_ids;
  std::vector<std::vector<Neighbor>> neighbors;
};

NeighborTable nearest_counties(std::span<const CountyStatic> statics);

struct ImputeOptions {
  std::size_t k = 5;
  bool impute_targets = false;
};

/// How many cells each rung of the fallback chain filled.
struct ImputeSummary {
  std::size_t nearest = 0;
  std::size_t widened = 0;
  std::size_t interpolated = 0;
  std::size_t county_mean = 0;
  std::size_t global_mean = 0;

  std::size_t total() const noexcept { return nearest + widened + interpolated + county_mean + global_mean; }
};

/// Fills missing weather cells (and outage cells when `impute_targets`) from the
/// k nearest counties, averaging only their observed values. When none of the k
/// has an observation the fill widens to every county, then to linear
/// interpolation within the county, then the county mean, then the global mean.
/// Only observed values feed the averages; filled cells are flagged Imputed.
PanelDataset impute_missing(const PanelDataset& panel, const NeighborTable& table, const ImputeOptions& options = {},
                            ImputeSummary* summary = nullptr);

}  // namespace outage

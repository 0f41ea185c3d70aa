#pragma once

// Model-ready rows: lagged outages and weather, county statics and a month
// one-hot, one row per (county, hour).

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "outage/hilp.hpp"
#include "outage/ingest.hpp"
#include "outage/matrix.hpp"
#include "outage/scaler.hpp"

namespace outage {

struct LagConfig {
  std::size_t n = 24;
  bool include_current_weather = true;
  Hours utc_offset{-5};  // for the month one-hot

  bool operator==(const LagConfig&) const = default;
};

struct RowKey {
  std::string county_id;
  UtcTime time;

  auto operator<=>(const RowKey&) const = default;
};

/// Column order: y_lag1..y_lagN, <weather>_lagL for L = (0|1)..N, the five
/// socio-economic columns, share_<infra>, month_01..month_12.
struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<RowKey> keys;
  Matrix values;
  std::vector<double> target;
  LagConfig lag;
  std::size_t dropped = 0;  // requested rows without full history

  std::size_t rows() const noexcept { return values.rows; }
  std::size_t column_index(std::string_view name) const;
};

std::vector<std::string> feature_columns(const LagConfig& lag);

/// Feature values for one (county, hour); nullopt when the lag history or the
/// target is unavailable. Reads nothing later than `hour`.
std::optional<std::vector<double>> feature_row(const PanelDataset& panel, CellRef cell, const LagConfig& lag);

/// Rows for `cells` in the given order; rows lacking history are dropped and counted.
/// Throws when nothing survives.
FeatureMatrix build_feature_matrix(const PanelDataset& panel, std::span<const CellRef> cells, const LagConfig& lag);
FeatureMatrix build_feature_matrix(const PanelDataset& panel, const ExtremeEventSet& set, const LagConfig& lag);

/// Evaluation window held out from training: hours [start, end] of one county.
struct HeldOutEvent {
  std::string id;
  std::string county_id;
  UtcTime start;
  UtcTime end;
};

/// True when the row's lag window [t - n, t] touches the event window of the same county.
bool touches_event(const RowKey& key, const HeldOutEvent& event, std::size_t lag_n);

/// Panel cells of the event window, in time order.
std::vector<CellRef> event_cells(const PanelDataset& panel, const HeldOutEvent& event);

/// Keeps rows where `keep(key)` holds.
template <typename Pred>
FeatureMatrix filter_rows(const FeatureMatrix& m, Pred keep) {
  FeatureMatrix out;
  out.columns = m.columns;
  out.lag = m.lag;
  out.dropped = m.dropped;
  out.values.cols = m.values.cols;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (!keep(m.keys[r])) continue;
    out.keys.push_back(m.keys[r]);
    out.values.append_row(m.values.row(r));
    out.target.push_back(m.target[r]);
  }
  return out;
}

/// CSV: county_id,timestamp_utc,<columns>,target with round-trip double formatting.
void write_feature_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(const std::filesystem::path& path, const LagConfig& lag);

/// Sequence view used by the recurrent model: `n` steps, each holding the
/// outage lag, one hour of weather, the statics and the month one-hot.
struct SequenceLayout {
  std::size_t steps = 0;
  std::size_t step_width = 0;
  std::vector<std::vector<std::size_t>> step_columns;  // column indices per step

  static SequenceLayout from(const FeatureMatrix& m);
  bool operator==(const SequenceLayout&) const = default;
};

/// Gathers one row into a steps x step_width buffer (row-major, oldest step first).
void gather_sequence(const SequenceLayout& layout, std::span<const double> row, std::span<double> out);

}  // namespace outage

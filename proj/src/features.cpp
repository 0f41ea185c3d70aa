#include "outage/features.hpp"

#include <algorithm>
#include <ostream>

#include "outage/csv.hpp"
#include "outage/error.hpp"

namespace outage {

namespace {

constexpr std::size_t kStaticColumns = 5 + kInfraCategories;
constexpr std::size_t kMonths = 12;

std::size_t first_weather_lag(const LagConfig& lag) { return lag.include_current_weather ? 0 : 1; }

void validate(const LagConfig& lag) {
  if (lag.n < 1) throw UserError("lag depth must be at least 1");
}

}  // namespace

std::size_t FeatureMatrix::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw UserError("feature matrix has no column '" + std::string(name) + "'");
}

std::vector<std::string> feature_columns(const LagConfig& lag) {
  validate(lag);
  std::vector<std::string> cols;
  for (std::size_t k = 1; k <= lag.n; ++k) cols.push_back("y_lag" + std::to_string(k));
  for (std::size_t k = first_weather_lag(lag); k <= lag.n; ++k)
    for (auto w : kWeatherColumns) cols.push_back(std::string(w) + "_lag" + std::to_string(k));
  cols.insert(cols.end(), {"income_usd", "unemployment_pct"});
  for (auto b : kBuildingAgeColumns) cols.emplace_back(b);
  for (auto k : kInfraNames) cols.push_back("share_" + std::string(k));
  for (std::size_t m = 1; m <= kMonths; ++m) cols.push_back(std::string("month_") + (m < 10 ? "0" : "") + std::to_string(m));
  return cols;
}

std::optional<std::vector<double>> feature_row(const PanelDataset& panel, CellRef cell, const LagConfig& lag) {
  validate(lag);
  const auto [c, h] = cell;
  if (h < lag.n || !panel.has_outage(c, h)) return std::nullopt;
  for (std::size_t k = 1; k <= lag.n; ++k)
    if (!panel.has_outage(c, h - k)) return std::nullopt;
  for (std::size_t k = first_weather_lag(lag); k <= lag.n; ++k)
    for (std::size_t f = 0; f < kWeatherFields; ++f)
      if (!panel.has_weather(c, h - k, f)) return std::nullopt;

  std::vector<double> row;
  row.reserve(lag.n + (lag.n + 1) * kWeatherFields + kStaticColumns + kMonths);
  for (std::size_t k = 1; k <= lag.n; ++k) row.push_back(panel.outage(c, h - k));
  for (std::size_t k = first_weather_lag(lag); k <= lag.n; ++k)
    for (std::size_t f = 0; f < kWeatherFields; ++f) row.push_back(panel.weather(c, h - k, f));
  const auto& s = panel.statics(c);
  row.push_back(s.avg_household_income);
  row.push_back(s.unemployment_rate);
  row.insert(row.end(), s.building_age_distribution.begin(), s.building_age_distribution.end());
  row.insert(row.end(), s.infra_shares.begin(), s.infra_shares.end());
  const int month = local_month(panel.time_at(h), lag.utc_offset);
  for (int m = 1; m <= static_cast<int>(kMonths); ++m) row.push_back(m == month ? 1.0 : 0.0);
  return row;
}

FeatureMatrix build_feature_matrix(const PanelDataset& panel, std::span<const CellRef> cells, const LagConfig& lag) {
  FeatureMatrix m;
  m.columns = feature_columns(lag);
  m.lag = lag;
  m.values.cols = m.columns.size();
  for (const auto& cell : cells) {
    auto row = feature_row(panel, cell, lag);
    if (!row) {
      ++m.dropped;
      continue;
    }
    m.keys.push_back({panel.county_id(cell.county), panel.time_at(cell.hour)});
    m.values.append_row(*row);
    m.target.push_back(panel.outage(cell.county, cell.hour));
  }
  if (m.rows() == 0)
    throw UserError("feature matrix is empty after history filtering (" + std::to_string(m.dropped) + " rows dropped)");
  return m;
}

FeatureMatrix build_feature_matrix(const PanelDataset& panel, const ExtremeEventSet& set, const LagConfig& lag) {
  const auto cells = set.cells();
  return build_feature_matrix(panel, cells, lag);
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
  std::vector<std::string> header = {"county_id", "timestamp_utc"};
  header.insert(header.end(), m.columns.begin(), m.columns.end());
  header.emplace_back("target");
  csv::write_row(out, header);
  std::vector<std::string> f(header.size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    f[0] = m.keys[r].county_id;
    f[1] = format_utc(m.keys[r].time);
    for (std::size_t c = 0; c < m.values.cols; ++c) f[2 + c] = csv::format_double(m.values(r, c));
    f.back() = csv::format_double(m.target[r]);
    csv::write_row(out, f);
  }
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path, const LagConfig& lag) {
  const csv::Table t = csv::read_file(path);
  FeatureMatrix m;
  m.lag = lag;
  m.columns = feature_columns(lag);
  std::vector<std::string> expected = {"county_id", "timestamp_utc"};
  expected.insert(expected.end(), m.columns.begin(), m.columns.end());
  expected.emplace_back("target");
  csv::require_header(t, expected);
  m.values.cols = m.columns.size();
  m.values.data.reserve(t.rows.size() * m.values.cols);
  for (const auto& row : t.rows) {
    m.keys.push_back({row.fields[0], parse_utc(row.fields[1])});
    for (std::size_t c = 0; c < m.values.cols; ++c) m.values.data.push_back(csv::parse_double(t, row, 2 + c));
    ++m.values.rows;
    m.target.push_back(csv::parse_double(t, row, expected.size() - 1));
  }
  return m;
}

bool touches_event(const RowKey& key, const HeldOutEvent& event, std::size_t lag_n) {
  if (key.county_id != event.county_id) return false;
  const UtcTime first = key.time - Hours{static_cast<long long>(lag_n)};
  return first <= event.end && key.time >= event.start;
}

std::vector<CellRef> event_cells(const PanelDataset& panel, const HeldOutEvent& event) {
  if (event.end < event.start) throw UserError("held-out event ends before it starts");
  const std::size_t c = panel.county_index(event.county_id);
  std::vector<CellRef> cells;
  for (std::size_t h = 0; h < panel.hour_count(); ++h)
    if (panel.time_at(h) >= event.start && panel.time_at(h) <= event.end) cells.push_back({c, h});
  if (cells.empty()) throw UserError("held-out event '" + event.id + "' lies outside the panel");
  return cells;
}

SequenceLayout SequenceLayout::from(const FeatureMatrix& m) {
  const LagConfig& lag = m.lag;
  SequenceLayout layout;
  layout.steps = lag.n;
  std::vector<std::size_t> shared;
  for (const char* name : {"income_usd", "unemployment_pct"}) shared.push_back(m.column_index(name));
  for (auto b : kBuildingAgeColumns) shared.push_back(m.column_index(b));
  for (auto k : kInfraNames) shared.push_back(m.column_index("share_" + std::string(k)));
  for (std::size_t mo = 1; mo <= kMonths; ++mo)
    shared.push_back(m.column_index(std::string("month_") + (mo < 10 ? "0" : "") + std::to_string(mo)));
  for (std::size_t k = lag.n; k >= 1; --k) {
    std::vector<std::size_t> cols = {m.column_index("y_lag" + std::to_string(k))};
    const std::size_t wlag = lag.include_current_weather ? k - 1 : k;
    for (auto w : kWeatherColumns) cols.push_back(m.column_index(std::string(w) + "_lag" + std::to_string(wlag)));
    cols.insert(cols.end(), shared.begin(), shared.end());
    layout.step_columns.push_back(std::move(cols));
  }
  layout.step_width = layout.step_columns.front().size();
  return layout;
}

void gather_sequence(const SequenceLayout& layout, std::span<const double> row, std::span<double> out) {
  for (std::size_t s = 0; s < layout.steps; ++s)
    for (std::size_t j = 0; j < layout.step_width; ++j) out[s * layout.step_width + j] = row[layout.step_columns[s][j]];
}

}  // namespace outage

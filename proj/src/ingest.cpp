#include "outage/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "outage/csv.hpp"
#include "outage/error.hpp"

namespace outage {

namespace {

const std::vector<std::string> kOutageHeader = {"county_id", "timestamp_utc", "customers_out"};
const std::vector<std::string> kStormHeader = {"county_id", "start_utc", "end_utc", "event_type"};
const std::vector<std::string> kInfraHeader = {"county_id", "poles", "towers", "substations", "transformers", "lines"};

std::vector<std::string> weather_header() {
  std::vector<std::string> h = {"county_id", "timestamp_utc"};
  for (auto c : kWeatherColumns) h.emplace_back(c);
  return h;
}

std::vector<std::string> census_header() {
  std::vector<std::string> h = {"county_id", "lat", "lon", "income_usd", "unemployment_pct"};
  for (auto c : kBuildingAgeColumns) h.emplace_back(c);
  return h;
}

std::vector<std::string> panel_header() {
  std::vector<std::string> h = {"county_id", "timestamp_utc", "customers_out"};
  for (auto c : kWeatherColumns) h.emplace_back(c);
  h.emplace_back("imputed_mask");
  return h;
}

std::vector<std::string> statics_header() {
  auto h = census_header();
  for (auto c : kInfraNames) h.emplace_back(c);
  for (auto c : kInfraNames) h.emplace_back("share_" + std::string(c));
  return h;
}

const std::string& county_field(const csv::Table& t, const csv::Row& row) {
  const std::string& id = row.fields[0];
  if (id.empty()) throw ParseError(t.source, row.line, t.header[0], "empty county id");
  return id;
}

UtcTime time_field(const csv::Table& t, const csv::Row& row, std::size_t col) {
  try {
    return parse_utc(row.fields[col]);
  } catch (const UserError& e) {
    throw ParseError(t.source, row.line, t.header[col], e.what());
  }
}

template <typename Record>
void sort_and_reject_duplicates(std::vector<Record>& records, std::vector<std::size_t>& lines, const csv::Table& t) {
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(records[a].county_id, records[a].timestamp) < std::tie(records[b].county_id, records[b].timestamp);
  });
  std::vector<Record> sorted;
  sorted.reserve(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& r = records[order[i]];
    if (i > 0) {
      const auto& prev = records[order[i - 1]];
      if (prev.county_id == r.county_id && prev.timestamp == r.timestamp)
        throw ParseError(t.source, lines[order[i]], "",
                         "duplicate (county, timestamp) " + r.county_id + " " + format_utc(r.timestamp) +
                             " (first seen at row " + std::to_string(lines[order[i - 1]]) + ")");
    }
    sorted.push_back(r);
  }
  records = std::move(sorted);
}

}  // namespace

std::vector<OutageRecord> parse_outage_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  csv::require_header(t, kOutageHeader);
  std::vector<OutageRecord> records;
  std::vector<std::size_t> lines;
  for (const auto& row : t.rows) {
    OutageRecord r{county_field(t, row), time_field(t, row, 1), csv::parse_int(t, row, 2)};
    if (!is_quarter_aligned(r.timestamp))
      throw ParseError(t.source, row.line, t.header[1], "timestamp not on a 15-minute boundary");
    if (r.customers_out < 0)
      throw ParseError(t.source, row.line, t.header[2], "negative count " + std::to_string(r.customers_out));
    records.push_back(std::move(r));
    lines.push_back(row.line);
  }
  sort_and_reject_duplicates(records, lines, t);
  return records;
}

std::vector<WeatherRecord> parse_weather_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  csv::require_header(t, weather_header());
  std::vector<WeatherRecord> records;
  std::vector<std::size_t> lines;
  for (const auto& row : t.rows) {
    WeatherRecord r{county_field(t, row), time_field(t, row, 1), {}};
    if (!is_hour_aligned(r.timestamp)) throw ParseError(t.source, row.line, t.header[1], "timestamp not on the hour");
    for (std::size_t f = 0; f < kWeatherFields; ++f) r.values[f] = csv::parse_optional_double(t, row, 2 + f);
    auto check_range = [&](std::size_t f, double lo, double hi) {
      if (r.values[f] && (*r.values[f] < lo || *r.values[f] > hi))
        throw ParseError(t.source, row.line, t.header[2 + f], "value " + csv::format_double(*r.values[f]) +
                                                                  " outside [" + csv::format_double(lo) + ", " +
                                                                  csv::format_double(hi) + "]");
    };
    check_range(kHumidity, 0.0, 100.0);
    check_range(kCloudCover, 0.0, 100.0);
    if (r.values[kPrecipitation] && *r.values[kPrecipitation] < 0.0)
      throw ParseError(t.source, row.line, t.header[2 + kPrecipitation], "negative precipitation");
    records.push_back(std::move(r));
    lines.push_back(row.line);
  }
  sort_and_reject_duplicates(records, lines, t);
  return records;
}

std::vector<CensusRecord> parse_census_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  csv::require_header(t, census_header());
  std::vector<CensusRecord> records;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    CensusRecord r;
    r.county_id = county_field(t, row);
    r.latitude = csv::parse_double(t, row, 1);
    r.longitude = csv::parse_double(t, row, 2);
    r.avg_household_income = csv::parse_double(t, row, 3);
    r.unemployment_rate = csv::parse_double(t, row, 4);
    for (std::size_t b = 0; b < kBuildingAgeBuckets; ++b) {
      r.building_age_distribution[b] = csv::parse_double(t, row, 5 + b);
      if (r.building_age_distribution[b] < 0.0)
        throw ParseError(t.source, row.line, t.header[5 + b], "negative building-age fraction");
    }
    if (r.latitude < -90.0 || r.latitude > 90.0 || r.longitude < -180.0 || r.longitude > 180.0)
      throw ParseError(t.source, row.line, "lat", "coordinates out of range");
    if (!seen.insert(r.county_id).second) throw ParseError(t.source, row.line, "county_id", "duplicate county");
    records.push_back(std::move(r));
  }
  std::sort(records.begin(), records.end(),
            [](const CensusRecord& a, const CensusRecord& b) { return a.county_id < b.county_id; });
  return records;
}

std::vector<InfrastructureRecord> parse_infrastructure_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  csv::require_header(t, kInfraHeader);
  std::vector<InfrastructureRecord> records;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    InfrastructureRecord r;
    r.county_id = county_field(t, row);
    for (std::size_t k = 0; k < kInfraCategories; ++k) {
      r.counts[k] = csv::parse_int(t, row, 1 + k);
      if (r.counts[k] < 0) throw ParseError(t.source, row.line, t.header[1 + k], "negative count");
    }
    if (!seen.insert(r.county_id).second) throw ParseError(t.source, row.line, "county_id", "duplicate county");
    records.push_back(std::move(r));
  }
  std::sort(records.begin(), records.end(),
            [](const InfrastructureRecord& a, const InfrastructureRecord& b) { return a.county_id < b.county_id; });
  return records;
}

std::vector<StormEvent> parse_storm_events_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  csv::require_header(t, kStormHeader);
  std::vector<StormEvent> storms;
  for (const auto& row : t.rows) {
    StormEvent s{county_field(t, row), time_field(t, row, 1), time_field(t, row, 2), row.fields[3]};
    if (s.end < s.start) throw ParseError(t.source, row.line, "end_utc", "storm ends before it starts");
    storms.push_back(std::move(s));
  }
  std::stable_sort(storms.begin(), storms.end(), [](const StormEvent& a, const StormEvent& b) {
    return std::tie(a.county_id, a.start, a.end) < std::tie(b.county_id, b.start, b.end);
  });
  return storms;
}

void write_outage_csv(std::ostream& out, std::span<const OutageRecord> records) {
  csv::write_row(out, kOutageHeader);
  for (const auto& r : records) csv::write_row(out, {r.county_id, format_utc(r.timestamp), std::to_string(r.customers_out)});
}

void write_weather_csv(std::ostream& out, std::span<const WeatherRecord> records) {
  csv::write_row(out, weather_header());
  for (const auto& r : records) {
    std::vector<std::string> f = {r.county_id, format_utc(r.timestamp)};
    for (const auto& v : r.values) f.push_back(v ? csv::format_double(*v) : std::string{});
    csv::write_row(out, f);
  }
}

void write_census_csv(std::ostream& out, std::span<const CensusRecord> records) {
  csv::write_row(out, census_header());
  for (const auto& r : records) {
    std::vector<std::string> f = {r.county_id, csv::format_double(r.latitude), csv::format_double(r.longitude),
                                  csv::format_double(r.avg_household_income), csv::format_double(r.unemployment_rate)};
    for (double b : r.building_age_distribution) f.push_back(csv::format_double(b));
    csv::write_row(out, f);
  }
}

void write_infrastructure_csv(std::ostream& out, std::span<const InfrastructureRecord> records) {
  csv::write_row(out, kInfraHeader);
  for (const auto& r : records) {
    std::vector<std::string> f = {r.county_id};
    for (auto c : r.counts) f.push_back(std::to_string(c));
    csv::write_row(out, f);
  }
}

void write_storm_events_csv(std::ostream& out, std::span<const StormEvent> storms) {
  csv::write_row(out, kStormHeader);
  for (const auto& s : storms) csv::write_row(out, {s.county_id, format_utc(s.start), format_utc(s.end), s.event_type});
}

std::vector<HourlySeries> resample_outages_hourly(std::span<const OutageRecord> records) {
  std::vector<HourlySeries> out;
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    while (j < records.size() && records[j].county_id == records[i].county_id) ++j;
    HourlySeries s{records[i].county_id, floor_hour(records[i].timestamp), {}};
    const UtcTime last = floor_hour(records[j - 1].timestamp);
    s.values.assign(static_cast<std::size_t>((last - s.start) / Hours{1}) + 1, std::nullopt);
    for (std::size_t k = i; k < j; ++k) {
      auto& cell = s.values[static_cast<std::size_t>((floor_hour(records[k].timestamp) - s.start) / Hours{1})];
      cell = cell ? std::max(*cell, records[k].customers_out) : records[k].customers_out;
    }
    out.push_back(std::move(s));
    i = j;
  }
  return out;
}

std::vector<std::array<double, kInfraCategories>> normalize_infrastructure(
    std::span<const InfrastructureRecord> records) {
  std::array<long double, kInfraCategories> totals{};
  for (const auto& r : records)
    for (std::size_t k = 0; k < kInfraCategories; ++k) totals[k] += static_cast<long double>(r.counts[k]);
  for (std::size_t k = 0; k < kInfraCategories; ++k)
    if (totals[k] <= 0) throw UserError("zero column: " + std::string(kInfraNames[k]));
  std::vector<std::array<double, kInfraCategories>> shares(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t k = 0; k < kInfraCategories; ++k)
      shares[i][k] = static_cast<double>(static_cast<long double>(records[i].counts[k]) / totals[k]);
  return shares;
}

std::vector<CountyStatic> assemble_statics(std::span<const CensusRecord> census,
                                           std::span<const InfrastructureRecord> infra) {
  std::map<std::string, const InfrastructureRecord*> by_id;
  for (const auto& r : infra) by_id[r.county_id] = &r;
  std::vector<std::string> missing;
  for (const auto& c : census)
    if (!by_id.count(c.county_id)) missing.push_back(c.county_id);
  if (!missing.empty() || census.size() != infra.size()) {
    std::set<std::string> census_ids;
    for (const auto& c : census) census_ids.insert(c.county_id);
    for (const auto& r : infra)
      if (!census_ids.count(r.county_id)) missing.push_back(r.county_id);
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw UserError("census and infrastructure county sets differ: " + list);
  }
  const auto shares = normalize_infrastructure(infra);
  std::map<std::string, std::size_t> infra_pos;
  for (std::size_t i = 0; i < infra.size(); ++i) infra_pos[infra[i].county_id] = i;

  std::vector<CountyStatic> out;
  for (const auto& c : census) {
    const std::size_t k = infra_pos.at(c.county_id);
    CountyStatic s;
    s.county_id = c.county_id;
    s.latitude = c.latitude;
    s.longitude = c.longitude;
    s.avg_household_income = c.avg_household_income;
    s.unemployment_rate = c.unemployment_rate;
    s.building_age_distribution = c.building_age_distribution;
    s.infra_counts = infra[k].counts;
    s.infra_shares = shares[k];
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const CountyStatic& a, const CountyStatic& b) { return a.county_id < b.county_id; });
  return out;
}

// ---------------------------------------------------------------------------
// PanelDataset

PanelDataset::PanelDataset(std::vector<CountyStatic> statics, UtcTime start, std::size_t hours)
    : statics_(std::move(statics)), start_(start), hours_(hours) {
  if (!is_hour_aligned(start)) throw UserError("panel start must be hour aligned");
  std::sort(statics_.begin(), statics_.end(),
            [](const CountyStatic& a, const CountyStatic& b) { return a.county_id < b.county_id; });
  for (std::size_t i = 1; i < statics_.size(); ++i)
    if (statics_[i].county_id == statics_[i - 1].county_id)
      throw UserError("duplicate county in statics: " + statics_[i].county_id);
  const std::size_t cells = statics_.size() * hours_;
  outage_.assign(cells, 0.0);
  outage_state_.assign(cells, CellState::Missing);
  weather_.assign(cells * kWeatherFields, 0.0);
  weather_state_.assign(cells * kWeatherFields, CellState::Missing);
}

std::optional<std::size_t> PanelDataset::hour_index(UtcTime t) const noexcept {
  if (t < start_ || t >= end() || !is_hour_aligned(t)) return std::nullopt;
  return static_cast<std::size_t>((t - start_) / Hours{1});
}

std::optional<std::size_t> PanelDataset::find_county(std::string_view id) const noexcept {
  auto it = std::lower_bound(statics_.begin(), statics_.end(), id,
                             [](const CountyStatic& s, std::string_view v) { return s.county_id < v; });
  if (it == statics_.end() || it->county_id != id) return std::nullopt;
  return static_cast<std::size_t>(it - statics_.begin());
}

std::size_t PanelDataset::county_index(std::string_view id) const {
  if (auto c = find_county(id)) return *c;
  throw UserError("unknown county id '" + std::string(id) + "'");
}

void PanelDataset::set_outage(std::size_t c, std::size_t h, double value, CellState state) noexcept {
  outage_[c * hours_ + h] = state == CellState::Missing ? 0.0 : value;
  outage_state_[c * hours_ + h] = state;
}

void PanelDataset::set_weather(std::size_t c, std::size_t h, std::size_t f, double value, CellState state) noexcept {
  const std::size_t i = (c * hours_ + h) * kWeatherFields + f;
  weather_[i] = state == CellState::Missing ? 0.0 : value;
  weather_state_[i] = state;
}

std::size_t PanelDataset::missing_weather_cells() const noexcept {
  return static_cast<std::size_t>(std::count(weather_state_.begin(), weather_state_.end(), CellState::Missing));
}

std::size_t PanelDataset::missing_outage_cells() const noexcept {
  return static_cast<std::size_t>(std::count(outage_state_.begin(), outage_state_.end(), CellState::Missing));
}

PanelDataset build_panel(std::span<const HourlySeries> outages, std::span<const WeatherRecord> weather,
                         std::vector<CountyStatic> statics, TimeRange range) {
  if (!is_hour_aligned(range.start) || !is_hour_aligned(range.end) || range.end <= range.start)
    throw UserError("time range must be hour aligned with start < end");
  const auto hours = static_cast<std::size_t>((range.end - range.start) / Hours{1});
  PanelDataset panel(std::move(statics), range.start, hours);

  std::set<std::string> unknown;
  for (const auto& s : outages)
    if (!panel.find_county(s.county_id)) unknown.insert(s.county_id);
  for (const auto& w : weather)
    if (!panel.find_county(w.county_id)) unknown.insert(w.county_id);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& id : unknown) list += (list.empty() ? "" : ", ") + id;
    throw UserError("county ids absent from statics: " + list);
  }

  for (const auto& s : outages) {
    const std::size_t c = *panel.find_county(s.county_id);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!s.values[i]) continue;
      if (auto h = panel.hour_index(s.start + Hours{static_cast<long long>(i)}))
        panel.set_outage(c, *h, static_cast<double>(*s.values[i]), CellState::Present);
    }
  }
  for (const auto& w : weather) {
    const std::size_t c = *panel.find_county(w.county_id);
    auto h = panel.hour_index(w.timestamp);
    if (!h) continue;
    for (std::size_t f = 0; f < kWeatherFields; ++f)
      if (w.values[f]) panel.set_weather(c, *h, f, *w.values[f], CellState::Present);
  }
  return panel;
}

void write_panel_csv(std::ostream& out, const PanelDataset& panel) {
  csv::write_row(out, panel_header());
  std::vector<std::string> f(3 + kWeatherFields + 1);
  for (std::size_t c = 0; c < panel.county_count(); ++c) {
    for (std::size_t h = 0; h < panel.hour_count(); ++h) {
      unsigned mask = 0;
      f[0] = panel.county_id(c);
      f[1] = format_utc(panel.time_at(h));
      f[2] = panel.has_outage(c, h) ? csv::format_double(panel.outage(c, h)) : std::string{};
      if (panel.outage_state(c, h) == CellState::Imputed) mask |= 1u;
      for (std::size_t k = 0; k < kWeatherFields; ++k) {
        f[3 + k] = panel.has_weather(c, h, k) ? csv::format_double(panel.weather(c, h, k)) : std::string{};
        if (panel.weather_state(c, h, k) == CellState::Imputed) mask |= 1u << (k + 1);
      }
      f[3 + kWeatherFields] = std::to_string(mask);
      csv::write_row(out, f);
    }
  }
}

PanelDataset read_panel_csv(std::istream& in, std::vector<CountyStatic> statics) {
  const csv::Table t = csv::read_stream(in, "panel");
  csv::require_header(t, panel_header());
  if (t.rows.empty()) throw UserError("panel: no rows");
  if (statics.empty() || t.rows.size() % statics.size() != 0)
    throw UserError("panel: row count is not a multiple of the county count");
  const std::size_t hours = t.rows.size() / statics.size();
  PanelDataset panel(std::move(statics), parse_utc(t.rows.front().fields[1]), hours);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t c = i / hours, h = i % hours;
    if (row.fields[0] != panel.county_id(c) || time_field(t, row, 1) != panel.time_at(h))
      throw ParseError(t.source, row.line, "", "panel rows are not a rectangular county-major grid");
    const auto mask = static_cast<unsigned>(csv::parse_int(t, row, 3 + kWeatherFields));
    if (auto v = csv::parse_optional_double(t, row, 2))
      panel.set_outage(c, h, *v, (mask & 1u) ? CellState::Imputed : CellState::Present);
    for (std::size_t k = 0; k < kWeatherFields; ++k)
      if (auto v = csv::parse_optional_double(t, row, 3 + k))
        panel.set_weather(c, h, k, *v, (mask >> (k + 1)) & 1u ? CellState::Imputed : CellState::Present);
  }
  return panel;
}

PanelDataset read_panel_csv(const std::filesystem::path& path, std::vector<CountyStatic> statics) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open '" + path.string() + "'");
  return read_panel_csv(in, std::move(statics));
}

void write_statics_csv(std::ostream& out, std::span<const CountyStatic> statics) {
  csv::write_row(out, statics_header());
  for (const auto& s : statics) {
    std::vector<std::string> f = {s.county_id, csv::format_double(s.latitude), csv::format_double(s.longitude),
                                  csv::format_double(s.avg_household_income), csv::format_double(s.unemployment_rate)};
    for (double b : s.building_age_distribution) f.push_back(csv::format_double(b));
    for (auto c : s.infra_counts) f.push_back(std::to_string(c));
    for (double v : s.infra_shares) f.push_back(csv::format_double(v));
    csv::write_row(out, f);
  }
}

std::vector<CountyStatic> read_statics_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read_file(path);
  csv::require_header(t, statics_header());
  std::vector<CountyStatic> out;
  for (const auto& row : t.rows) {
    CountyStatic s;
    s.county_id = county_field(t, row);
    s.latitude = csv::parse_double(t, row, 1);
    s.longitude = csv::parse_double(t, row, 2);
    s.avg_household_income = csv::parse_double(t, row, 3);
    s.unemployment_rate = csv::parse_double(t, row, 4);
    for (std::size_t b = 0; b < kBuildingAgeBuckets; ++b) s.building_age_distribution[b] = csv::parse_double(t, row, 5 + b);
    for (std::size_t k = 0; k < kInfraCategories; ++k) s.infra_counts[k] = csv::parse_int(t, row, 8 + k);
    for (std::size_t k = 0; k < kInfraCategories; ++k) s.infra_shares[k] = csv::parse_double(t, row, 13 + k);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace outage

#include "outage/impute.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "outage/error.hpp"

namespace outage {

NeighborTable nearest_counties(std::span<const CountyStatic> statics) {
  if (statics.size() < 2) throw UserError("nearest_counties needs at least 2 counties");
  NeighborTable table;
  for (const auto& s : statics) table.county_ids.push_back(s.county_id);
  table.neighbors.resize(statics.size());
  for (std::size_t i = 0; i < statics.size(); ++i) {
    auto& list = table.neighbors[i];
    list.reserve(statics.size() - 1);
    for (std::size_t j = 0; j < statics.size(); ++j) {
      if (i == j) continue;
      const double dx = statics[i].latitude - statics[j].latitude;
      const double dy = statics[i].longitude - statics[j].longitude;
      list.push_back({j, std::sqrt(dx * dx + dy * dy)});
    }
    std::sort(list.begin(), list.end(), [&](const Neighbor& a, const Neighbor& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      return statics[a.county].county_id < statics[b.county].county_id;
    });
  }
  return table;
}

namespace {

// Uniform view over one scalar field of the panel (an outage series or one weather feature).
struct FieldAccess {
  std::function<bool(std::size_t, std::size_t)> observed;
  std::function<bool(std::size_t, std::size_t)> missing;
  std::function<double(std::size_t, std::size_t)> value;
  std::function<void(std::size_t, std::size_t, double)> fill;
  std::string name;
};

void impute_field(const PanelDataset& src, const NeighborTable& table, std::size_t k, const FieldAccess& field,
                  ImputeSummary& summary) {
  const std::size_t counties = src.county_count();
  const std::size_t hours = src.hour_count();

  std::optional<double> global_mean;
  {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < counties; ++c)
      for (std::size_t h = 0; h < hours; ++h)
        if (field.observed(c, h)) {
          sum += field.value(c, h);
          ++n;
        }
    if (n > 0) global_mean = sum / static_cast<double>(n);
  }

  for (std::size_t c = 0; c < counties; ++c) {
    const auto& neighbors = table.neighbors[c];
    const std::size_t take = std::min(k, neighbors.size());
    std::optional<double> county_mean;
    bool county_mean_done = false;

    for (std::size_t h = 0; h < hours; ++h) {
      if (!field.missing(c, h)) continue;

      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < take; ++i)
        if (field.observed(neighbors[i].county, h)) {
          sum += field.value(neighbors[i].county, h);
          ++n;
        }
      if (n > 0) {
        field.fill(c, h, sum / static_cast<double>(n));
        ++summary.nearest;
        continue;
      }

      for (std::size_t i = take; i < neighbors.size(); ++i)
        if (field.observed(neighbors[i].county, h)) {
          sum += field.value(neighbors[i].county, h);
          ++n;
        }
      if (n > 0) {
        field.fill(c, h, sum / static_cast<double>(n));
        ++summary.widened;
        continue;
      }

      std::optional<std::size_t> before, after;
      for (std::size_t b = h; b-- > 0;)
        if (field.observed(c, b)) {
          before = b;
          break;
        }
      for (std::size_t a = h + 1; a < hours; ++a)
        if (field.observed(c, a)) {
          after = a;
          break;
        }
      if (before && after) {
        const double v0 = field.value(c, *before);
        const double v1 = field.value(c, *after);
        const double frac = static_cast<double>(h - *before) / static_cast<double>(*after - *before);
        field.fill(c, h, v0 + (v1 - v0) * frac);
        ++summary.interpolated;
        continue;
      }

      if (!county_mean_done) {
        double s = 0.0;
        std::size_t m = 0;
        for (std::size_t t = 0; t < hours; ++t)
          if (field.observed(c, t)) {
            s += field.value(c, t);
            ++m;
          }
        if (m > 0) county_mean = s / static_cast<double>(m);
        county_mean_done = true;
      }
      if (county_mean) {
        field.fill(c, h, *county_mean);
        ++summary.county_mean;
        continue;
      }

      if (!global_mean) throw UserError("cannot impute '" + field.name + "': no observed values anywhere");
      field.fill(c, h, *global_mean);
      ++summary.global_mean;
    }
  }
}

}  // namespace

PanelDataset impute_missing(const PanelDataset& panel, const NeighborTable& table, const ImputeOptions& options,
                            ImputeSummary* summary) {
  if (options.k == 0) throw UserError("imputation k must be positive");
  if (table.county_ids.size() != panel.county_count()) throw UserError("neighbor table does not match panel counties");
  for (std::size_t c = 0; c < panel.county_count(); ++c)
    if (table.county_ids[c] != panel.county_id(c)) throw UserError("neighbor table does not match panel counties");

  PanelDataset out = panel;
  ImputeSummary local;

  for (std::size_t f = 0; f < kWeatherFields; ++f) {
    FieldAccess access{
        [&panel, f](std::size_t c, std::size_t h) { return panel.weather_state(c, h, f) == CellState::Present; },
        [&panel, f](std::size_t c, std::size_t h) { return !panel.has_weather(c, h, f); },
        [&panel, f](std::size_t c, std::size_t h) { return panel.weather(c, h, f); },
        [&out, f](std::size_t c, std::size_t h, double v) { out.set_weather(c, h, f, v, CellState::Imputed); },
        std::string(kWeatherNames[f])};
    impute_field(panel, table, options.k, access, local);
  }
  if (options.impute_targets) {
    FieldAccess access{[&panel](std::size_t c, std::size_t h) { return panel.outage_state(c, h) == CellState::Present; },
                       [&panel](std::size_t c, std::size_t h) { return !panel.has_outage(c, h); },
                       [&panel](std::size_t c, std::size_t h) { return panel.outage(c, h); },
                       [&out](std::size_t c, std::size_t h, double v) { out.set_outage(c, h, v, CellState::Imputed); },
                       "customers_out"};
    impute_field(panel, table, options.k, access, local);
  }
  if (summary) *summary = local;
  return out;
}

}  // namespace outage

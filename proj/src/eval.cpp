#include "outage/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "outage/csv.hpp"
#include "outage/error.hpp"

namespace outage {

using nlohmann::json;

namespace {

void require_pairs(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size())
    throw UserError("actual and predicted lengths differ (" + std::to_string(actual.size()) + " vs " +
                    std::to_string(predicted.size()) + ")");
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write '" + path.string() + "'");
  return out;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".metrics.json";
  return p;
}

}  // namespace

MapeResult mape(std::span<const double> actual, std::span<const double> predicted) {
  require_pairs(actual, predicted);
  MapeResult r;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      ++r.excluded;
      continue;
    }
    sum += std::abs(actual[i] - predicted[i]) / actual[i];
    ++used;
  }
  if (used == 0) throw UserError("MAPE undefined: every actual value is zero");
  r.value_pct = sum / static_cast<double>(used) * 100.0;
  return r;
}

double r2(std::span<const double> actual, std::span<const double> predicted) {
  require_pairs(actual, predicted);
  if (actual.size() < 2) throw UserError("R² undefined: fewer than two values");
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  if (ss_tot == 0.0) throw UserError("R² undefined: actual values are constant");
  return (1.0 - ss_res / ss_tot) * 100.0;
}

EvalReport make_report(std::string event_id, std::string model_kind, std::vector<UtcTime> timestamps,
                       std::vector<double> actual, std::vector<double> predicted) {
  if (timestamps.size() != actual.size()) throw UserError("report series are not aligned");
  EvalReport r;
  r.event_id = std::move(event_id);
  r.model_kind = std::move(model_kind);
  r.timestamps = std::move(timestamps);
  r.actual = std::move(actual);
  r.predicted = std::move(predicted);
  const auto m = mape(r.actual, r.predicted);
  r.mape_pct = m.value_pct;
  r.excluded = m.excluded;
  r.r2_pct = r2(r.actual, r.predicted);
  return r;
}

EvalReport evaluate_event(const TrainedModel& model, const FeatureMatrix& rows, const HeldOutEvent& event) {
  if (rows.rows() == 0) throw UserError("event '" + event.id + "' has no feature rows");
  std::vector<UtcTime> ts;
  for (const auto& k : rows.keys) {
    if (k.county_id != event.county_id || k.time < event.start || k.time > event.end)
      throw UserError("row " + k.county_id + " " + format_utc(k.time) + " is outside event '" + event.id + "'");
    ts.push_back(k.time);
  }
  return make_report(event.id, std::string(kind_name(kind_of(model))), std::move(ts), rows.target,
                     predict(model, rows));
}

json report_to_json(const EvalReport& r) {
  json series = json::array();
  for (std::size_t i = 0; i < r.timestamps.size(); ++i)
    series.push_back({{"timestamp_utc", format_utc(r.timestamps[i])}, {"actual", r.actual[i]},
                      {"predicted", r.predicted[i]}});
  return {{"format", "outage-report/1"},
          {"event_id", r.event_id},
          {"model_kind", r.model_kind},
          {"mape_pct", r.mape_pct},
          {"r2_pct", r.r2_pct},
          {"excluded_hours", r.excluded},
          {"series", std::move(series)}};
}

EvalReport report_from_json(const json& j) {
  try {
    std::vector<UtcTime> ts;
    std::vector<double> a, p;
    for (const auto& s : j.at("series")) {
      ts.push_back(parse_utc(s.at("timestamp_utc").get<std::string>()));
      a.push_back(s.at("actual").get<double>());
      p.push_back(s.at("predicted").get<double>());
    }
    auto r = make_report(j.at("event_id").get<std::string>(), j.at("model_kind").get<std::string>(), std::move(ts),
                         std::move(a), std::move(p));
    if (r.mape_pct != j.at("mape_pct").get<double>() || r.r2_pct != j.at("r2_pct").get<double>() ||
        r.excluded != j.at("excluded_hours").get<std::size_t>())
      throw UserError("report metrics do not match its series");
    return r;
  } catch (const json::exception& e) {
    throw UserError(std::string("malformed report: ") + e.what());
  }
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << report_to_json(report).dump(2) << '\n';
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UserError("malformed report '" + path.string() + "': " + e.what());
  }
  return report_from_json(j);
}

void emit_plot_data(const EvalReport& report, const std::filesystem::path& path) {
  {
    auto out = open_for_write(path);
    out << "timestamp_utc,actual,predicted\n";
    for (std::size_t i = 0; i < report.timestamps.size(); ++i)
      out << format_utc(report.timestamps[i]) << ',' << csv::format_double(report.actual[i]) << ','
          << csv::format_double(report.predicted[i]) << '\n';
  }
  auto side = open_for_write(sidecar(path));
  side << json{{"event_id", report.event_id},
               {"model_kind", report.model_kind},
               {"rows", report.timestamps.size()},
               {"mape_pct", report.mape_pct},
               {"r2_pct", report.r2_pct},
               {"excluded_hours", report.excluded}}
              .dump(2)
       << '\n';
}

void emit_plot_data(std::vector<std::pair<std::string, double>> importance, const std::filesystem::path& path) {
  std::stable_sort(importance.begin(), importance.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  {
    auto out = open_for_write(path);
    out << "feature,importance\n";
    for (const auto& [name, v] : importance) out << csv::escape(name) << ',' << csv::format_double(v) << '\n';
  }
  double total = 0.0;
  for (const auto& kv : importance) total += kv.second;
  auto side = open_for_write(sidecar(path));
  side << json{{"rows", importance.size()},
               {"top_feature", importance.empty() ? "" : importance.front().first},
               {"total", total}}
              .dump(2)
       << '\n';
}

}  // namespace outage

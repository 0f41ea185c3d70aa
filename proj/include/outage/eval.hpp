#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "outage/features.hpp"
#include "outage/model_io.hpp"

namespace outage {

struct MapeResult {
  double value_pct = 0.0;
  std::size_t excluded = 0;  // pairs with a zero actual
};

/// Mean of |a - p| / a over pairs with a != 0, as a percentage.
MapeResult mape(std::span<const double> actual, std::span<const double> predicted);

/// Coefficient of determination as a percentage; negative when worse than the mean.
double r2(std::span<const double> actual, std::span<const double> predicted);

struct EvalReport {
  std::string event_id;
  std::string model_kind;
  std::vector<UtcTime> timestamps;
  std::vector<double> actual;
  std::vector<double> predicted;
  double mape_pct = 0.0;
  double r2_pct = 0.0;
  std::size_t excluded = 0;

  bool operator==(const EvalReport&) const = default;
};

EvalReport make_report(std::string event_id, std::string model_kind, std::vector<UtcTime> timestamps,
                       std::vector<double> actual, std::vector<double> predicted);

/// Predicts every row of `rows` (already restricted to the event window) and scores it.
EvalReport evaluate_event(const TrainedModel& model, const FeatureMatrix& rows, const HeldOutEvent& event);

nlohmann::json report_to_json(const EvalReport& report);
/// Metrics are recomputed from the series and must match the stored values.
EvalReport report_from_json(const nlohmann::json& j);
void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

/// timestamp,actual,predicted plus `<path>.metrics.json`.
void emit_plot_data(const EvalReport& report, const std::filesystem::path& path);
/// feature,importance sorted by importance descending, plus `<path>.metrics.json`.
void emit_plot_data(std::vector<std::pair<std::string, double>> importance, const std::filesystem::path& path);

}  // namespace outage

#pragma once

#include <filesystem>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "outage/adaboost.hpp"
#include "outage/features.hpp"
#include "outage/forest.hpp"
#include "outage/lstm.hpp"

namespace outage {

using TrainedModel = std::variant<ForestModel, BoostModel, LstmModel>;

enum class ModelKind { Forest, AdaBoost, Lstm };

inline constexpr std::string_view kModelFormat = "outage-model/1";

std::string_view kind_name(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);
ModelKind kind_of(const TrainedModel& model) noexcept;

/// Predictions in customers for every row of `m`.
std::vector<double> predict(const TrainedModel& model, const FeatureMatrix& m);

nlohmann::json scaler_to_json(const MinMaxScaler& s);
MinMaxScaler scaler_from_json(const nlohmann::json& j);
nlohmann::json lag_to_json(const LagConfig& lag);
LagConfig lag_from_json(const nlohmann::json& j);

/// Self-describing container: format tag, kind, config, parameters, scalers, training curve.
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace outage

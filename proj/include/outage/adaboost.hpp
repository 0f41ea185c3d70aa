#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "outage/features.hpp"
#include "outage/tree.hpp"

namespace outage {

enum class BoostLoss { Linear, Square, Exponential };

struct BoostConfig {
  std::size_t estimators = 120;
  double learning_rate = 0.001;
  BoostLoss loss = BoostLoss::Linear;
  TreeParams tree{3, 2};
  std::uint64_t seed = 0;

  bool operator==(const BoostConfig&) const = default;
};

struct BoostModel {
  BoostConfig config;
  std::vector<RegressionTree> learners;
  std::vector<double> betas;    // confidence beta_m in (0, 1)
  std::vector<double> weights;  // learning_rate * log(1 / beta_m)
  std::vector<std::string> feature_names;
  std::string warning;
};

/// AdaBoost.R2: each round fits a weak tree on a weight-proportional resample,
/// scores losses against the largest absolute error, and reweights by
/// beta^((1 - L_i) * learning_rate). Stops when the average loss reaches 0.5
/// (keeping a lone first learner with a warning) or the fit is exact.
BoostModel train_adaboost(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names,
                          const BoostConfig& cfg);
BoostModel train_adaboost(const FeatureMatrix& m, const BoostConfig& cfg);

/// Lowest prediction whose cumulative weight reaches half the total.
double weighted_median(std::span<const double> values, std::span<const double> weights);

double predict_adaboost(const BoostModel& model, std::span<const double> row);
std::vector<double> predict_adaboost(const BoostModel& model, const Matrix& rows);

}  // namespace outage

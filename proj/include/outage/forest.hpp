#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "outage/features.hpp"
#include "outage/tree.hpp"

namespace outage {

struct ForestConfig {
  std::size_t estimators = 100;
  TreeParams tree{};
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency

  bool operator==(const ForestConfig&) const = default;
};

struct ForestModel {
  ForestConfig config;
  std::vector<RegressionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::vector<std::string> feature_names;
};

/// Each tree is fit on a bootstrap resample of size N drawn from its own seed,
/// so the result does not depend on the thread count.
ForestModel train_forest(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names,
                         const ForestConfig& cfg);
ForestModel train_forest(const FeatureMatrix& m, const ForestConfig& cfg);

double predict_forest(const ForestModel& model, std::span<const double> row);
std::vector<double> predict_forest(const ForestModel& model, const Matrix& rows);

/// Impurity importance: per-tree decreases normalized to 1, averaged over trees,
/// renormalized. All zeros when no tree has a split.
std::vector<std::pair<std::string, double>> forest_importance(const ForestModel& model);

}  // namespace outage

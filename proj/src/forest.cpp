#include "outage/forest.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "outage/error.hpp"
#include "outage/rng.hpp"

namespace outage {

ForestModel train_forest(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names,
                         const ForestConfig& cfg) {
  if (x.rows < 2 || x.cols < 1) throw UserError("random forest needs at least 2 rows and 1 feature");
  if (y.size() != x.rows) throw UserError("target length does not match row count");
  if (cfg.estimators == 0) throw UserError("random forest needs at least one estimator");

  ForestModel model;
  model.config = cfg;
  model.feature_names = std::move(feature_names);
  model.trees.resize(cfg.estimators);
  model.tree_seeds.resize(cfg.estimators);
  for (std::size_t i = 0; i < cfg.estimators; ++i) model.tree_seeds[i] = derive_rng(cfg.seed, i)();

  auto fit_one = [&](std::size_t i) {
    std::vector<std::size_t> rows(x.rows);
    if (cfg.bootstrap) {
      Rng rng(model.tree_seeds[i]);
      std::uniform_int_distribution<std::size_t> pick(0, x.rows - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    }
    model.trees[i] = RegressionTree::fit(x, y, rows, cfg.tree);
  };

  std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.estimators);
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.estimators; ++i) fit_one(i);
    return model;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cfg.estimators; i = next++) {
        try {
          fit_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return model;
}

ForestModel train_forest(const FeatureMatrix& m, const ForestConfig& cfg) {
  return train_forest(m.values, m.target, m.columns, cfg);
}

double predict_forest(const ForestModel& model, std::span<const double> row) {
  if (model.trees.empty()) throw UserError("forest has no trees");
  if (row.size() != model.trees.front().feature_count())
    throw UserError("row has " + std::to_string(row.size()) + " features, forest expects " +
                    std::to_string(model.trees.front().feature_count()));
  double sum = 0.0;
  for (const auto& t : model.trees) sum += t.predict(row);
  return sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_forest(const ForestModel& model, const Matrix& rows) {
  std::vector<double> out(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) out[r] = predict_forest(model, rows.row(r));
  return out;
}

std::vector<std::pair<std::string, double>> forest_importance(const ForestModel& model) {
  if (model.trees.empty()) throw UserError("forest has no trees");
  const std::size_t f = model.trees.front().feature_count();
  std::vector<double> total(f, 0.0);
  for (const auto& t : model.trees) {
    auto imp = t.impurity_importance();
    double s = 0.0;
    for (double v : imp) s += v;
    if (s <= 0.0) continue;
    for (std::size_t j = 0; j < f; ++j) total[j] += imp[j] / s;
  }
  double s = 0.0;
  for (auto& v : total) {
    v /= static_cast<double>(model.trees.size());
    s += v;
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < f; ++j)
    out.emplace_back(j < model.feature_names.size() ? model.feature_names[j] : "f" + std::to_string(j),
                     s > 0.0 ? total[j] / s : 0.0);
  return out;
}

}  // namespace outage

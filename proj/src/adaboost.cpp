#include "outage/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "outage/error.hpp"
#include "outage/rng.hpp"

namespace outage {

BoostModel train_adaboost(const Matrix& x, std::span<const double> y, std::vector<std::string> feature_names,
                          const BoostConfig& cfg) {
  if (x.rows < 2 || x.cols < 1) throw UserError("AdaBoost needs at least 2 rows and 1 feature");
  if (y.size() != x.rows) throw UserError("target length does not match row count");
  if (cfg.estimators == 0) throw UserError("AdaBoost needs at least one estimator");
  if (!(cfg.learning_rate > 0.0)) throw UserError("AdaBoost learning rate must be positive");

  const std::size_t n = x.rows;
  BoostModel model;
  model.config = cfg;
  model.feature_names = std::move(feature_names);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> cdf(n), err(n);
  std::vector<std::size_t> rows(n);
  Rng rng = derive_rng(cfg.seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t m = 0; m < cfg.estimators; ++m) {
    std::partial_sum(w.begin(), w.end(), cdf.begin());
    const double total = cdf.back();
    for (auto& r : rows) {
      const double u = unit(rng) * total;
      r = std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()), n - 1);
    }
    RegressionTree tree = RegressionTree::fit(x, y, rows, cfg.tree);

    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = std::abs(tree.predict(x.row(i)) - y[i]);
      max_err = std::max(max_err, err[i]);
    }
    if (max_err == 0.0) {
      model.learners.push_back(std::move(tree));
      model.betas.push_back(std::numeric_limits<double>::min());
      model.weights.push_back(1.0);
      break;
    }
    double avg_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double l = err[i] / max_err;
      if (cfg.loss == BoostLoss::Square) l *= l;
      if (cfg.loss == BoostLoss::Exponential) l = 1.0 - std::exp(-l);
      err[i] = l;
      avg_loss += w[i] * l;
    }
    avg_loss /= total;

    if (avg_loss >= 0.5) {
      if (m == 0) {
        model.learners.push_back(std::move(tree));
        model.betas.push_back(1.0);
        model.weights.push_back(1.0);
        model.warning = "first weak learner has average loss " + std::to_string(avg_loss) +
                        " >= 0.5; ensemble holds that single learner";
      }
      break;
    }
    const double beta = std::max(avg_loss / (1.0 - avg_loss), std::numeric_limits<double>::min());
    model.learners.push_back(std::move(tree));
    model.betas.push_back(beta);
    model.weights.push_back(cfg.learning_rate * std::log(1.0 / beta));

    if (m + 1 < cfg.estimators) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= std::pow(beta, (1.0 - err[i]) * cfg.learning_rate);
        s += w[i];
      }
      if (!(s > 0.0)) break;
      for (auto& v : w) v /= s;
    }
  }
  return model;
}

BoostModel train_adaboost(const FeatureMatrix& m, const BoostConfig& cfg) {
  return train_adaboost(m.values, m.target, m.columns, cfg);
}

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size()) throw UserError("weighted median of mismatched inputs");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double w : weights) total += w;
  double cum = 0.0;
  for (std::size_t i : order) {
    cum += weights[i];
    if (cum >= 0.5 * total) return values[i];
  }
  return values[order.back()];
}

double predict_adaboost(const BoostModel& model, std::span<const double> row) {
  if (model.learners.empty()) throw UserError("boosted model has no learners");
  if (row.size() != model.learners.front().feature_count())
    throw UserError("row has " + std::to_string(row.size()) + " features, model expects " +
                    std::to_string(model.learners.front().feature_count()));
  std::vector<double> preds(model.learners.size());
  for (std::size_t m = 0; m < preds.size(); ++m) preds[m] = model.learners[m].predict(row);
  return weighted_median(preds, model.weights);
}

std::vector<double> predict_adaboost(const BoostModel& model, const Matrix& rows) {
  std::vector<double> out(rows.rows);
  for (std::size_t r = 0; r < rows.rows; ++r) out[r] = predict_adaboost(model, rows.row(r));
  return out;
}

}  // namespace outage

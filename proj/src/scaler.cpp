#include "outage/scaler.hpp"

#include <algorithm>

#include "outage/error.hpp"

namespace outage {

MinMaxScaler::MinMaxScaler(std::vector<double> min, std::vector<double> max)
    : fitted_(true), min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) throw UserError("scaler min/max dimension mismatch");
  for (std::size_t i = 0; i < min_.size(); ++i)
    if (max_[i] < min_[i]) throw UserError("scaler max < min");
}

void MinMaxScaler::fit(const Matrix& m) {
  if (m.rows == 0) throw UserError("cannot fit a scaler on zero rows");
  min_.assign(m.cols, 0.0);
  max_.assign(m.cols, 0.0);
  for (std::size_t c = 0; c < m.cols; ++c) {
    min_[c] = max_[c] = m(0, c);
    for (std::size_t r = 1; r < m.rows; ++r) {
      min_[c] = std::min(min_[c], m(r, c));
      max_[c] = std::max(max_[c], m(r, c));
    }
  }
  fitted_ = true;
}

void MinMaxScaler::fit(std::span<const double> column) {
  if (column.empty()) throw UserError("cannot fit a scaler on zero rows");
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  min_ = {*lo};
  max_ = {*hi};
  fitted_ = true;
}

void MinMaxScaler::require_fitted() const {
  if (!fitted_) throw UserError("min-max scaler used before fit");
}

double MinMaxScaler::apply(double v, std::size_t col) const {
  require_fitted();
  const double range = max_[col] - min_[col];
  return range == 0.0 ? 0.0 : (v - min_[col]) / range;
}

double MinMaxScaler::invert(double scaled, std::size_t col) const {
  require_fitted();
  return min_[col] + scaled * (max_[col] - min_[col]);
}

Matrix MinMaxScaler::apply(const Matrix& m) const {
  require_fitted();
  if (m.cols != dimension()) throw UserError("scaler dimension mismatch");
  Matrix out(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = apply(m(r, c), c);
  return out;
}

Matrix MinMaxScaler::invert(const Matrix& m) const {
  require_fitted();
  if (m.cols != dimension()) throw UserError("scaler dimension mismatch");
  Matrix out(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = invert(m(r, c), c);
  return out;
}

std::vector<double> MinMaxScaler::apply(std::span<const double> row) const {
  require_fitted();
  if (row.size() != dimension()) throw UserError("scaler dimension mismatch");
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = apply(row[c], c);
  return out;
}

std::vector<double> MinMaxScaler::invert(std::span<const double> row) const {
  require_fitted();
  if (row.size() != dimension()) throw UserError("scaler dimension mismatch");
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = invert(row[c], c);
  return out;
}

}  // namespace outage

#pragma once

#include <span>
#include <vector>

#include "outage/matrix.hpp"

namespace outage {

/// Per-column min-max scaling to [0, 1] on the fitted data. Constant columns map
/// to 0. Values outside the fitted range extrapolate linearly (no clipping).
class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  MinMaxScaler(std::vector<double> min, std::vector<double> max);

  void fit(const Matrix& m);
  void fit(std::span<const double> column);

  bool fitted() const noexcept { return fitted_; }
  std::size_t dimension() const noexcept { return min_.size(); }
  const std::vector<double>& min() const noexcept { return min_; }
  const std::vector<double>& max() const noexcept { return max_; }
  bool constant(std::size_t col) const noexcept { return max_[col] == min_[col]; }

  double apply(double v, std::size_t col = 0) const;
  double invert(double scaled, std::size_t col = 0) const;
  Matrix apply(const Matrix& m) const;
  Matrix invert(const Matrix& m) const;
  std::vector<double> apply(std::span<const double> row) const;
  std::vector<double> invert(std::span<const double> row) const;

  bool operator==(const MinMaxScaler&) const = default;

 private:
  void require_fitted() const;

  bool fitted_ = false;
  std::vector<double> min_;
  std::vector<double> max_;
};

}  // namespace outage

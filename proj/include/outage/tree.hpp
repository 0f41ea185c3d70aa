#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "outage/matrix.hpp"

namespace outage {

struct TreeParams {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 2;

  bool operator==(const TreeParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;             // mean target of the node's samples
  std::size_t samples = 0;
  double impurity_decrease = 0.0; // n*var(parent) - nL*var(left) - nR*var(right)

  bool operator==(const TreeNode&) const = default;
};

/// CART regression tree: greedy variance-reduction splits at midpoints between
/// consecutive distinct feature values; rows with x <= threshold go left.
/// Among equal scores the first feature, then the lowest threshold, wins.
class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, std::size_t features);

  /// Fits on the rows listed in `sample_rows` (duplicates allowed, as in a bootstrap).
  static RegressionTree fit(const Matrix& x, std::span<const double> y, std::span<const std::size_t> sample_rows,
                            const TreeParams& params);
  static RegressionTree fit(const Matrix& x, std::span<const double> y, const TreeParams& params);

  double predict(std::span<const double> row) const;
  std::size_t feature_count() const noexcept { return features_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  /// Summed impurity decrease per feature (unnormalized).
  std::vector<double> impurity_importance() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t features_ = 0;
};

}  // namespace outage

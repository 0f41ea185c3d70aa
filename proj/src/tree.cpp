#include "outage/tree.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "outage/error.hpp"

namespace outage {

namespace {

// Per-feature orderings of sample positions; every node owns the same
// [begin, end) slice in each ordering.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows, const TreeParams& params)
      : x_(x), params_(params), n_(rows.size()), rows_(rows.begin(), rows.end()), y_(rows.size()), order_(x.cols),
        goes_left_(rows.size()) {
    for (std::size_t i = 0; i < n_; ++i) y_[i] = y[rows_[i]];
    for (std::size_t f = 0; f < x.cols; ++f) {
      auto& ord = order_[f];
      ord.resize(n_);
      std::iota(ord.begin(), ord.end(), 0u);
      std::stable_sort(ord.begin(), ord.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return value(a, f) < value(b, f); });
    }
  }

  std::vector<TreeNode> build() {
    grow(0, n_, 0);
    return std::move(nodes_);
  }

 private:
  double value(std::uint32_t pos, std::size_t f) const { return x_(rows_[pos], f); }

  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const std::size_t n = end - begin;
    double sum = 0.0;
    bool pure = true;
    const double first = y_[order_.empty() ? begin : order_[0][begin]];
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y_[order_.empty() ? i : order_[0][i]];
      sum += v;
      pure = pure && v == first;
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    nodes_[id].samples = n;
    nodes_[id].value = sum / static_cast<double>(n);

    if (pure || order_.empty() || n < 2 * params_.min_samples_leaf || n < 2 ||
        (params_.max_depth > 0 && depth >= params_.max_depth))
      return id;

    // Scores use targets centred on the node mean; a split's score is then its
    // impurity decrease. Candidates within a relative 1e-12 of the best tie.
    const double mean = nodes_[id].value;
    double total_c = 0.0, sse = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double dv = y_[order_[0][i]] - mean;
      total_c += dv;
      sse += dv * dv;
    }
    const double tol = 1e-12 * sse;
    double best_score = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);

    for (std::size_t f = 0; f < order_.size(); ++f) {
      const auto& ord = order_[f];
      double left_c = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        left_c += y_[ord[i]] - mean;
        const std::size_t nl = i + 1 - begin;
        const std::size_t nr = n - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        const double xa = value(ord[i], f);
        const double xb = value(ord[i + 1], f);
        if (!(xa < xb)) continue;
        const double right_c = total_c - left_c;
        const double score = left_c * left_c / static_cast<double>(nl) + right_c * right_c / static_cast<double>(nr);
        if (score > best_score + tol) {
          best_score = score;
          best_feature = static_cast<int>(f);
          double mid = xa + (xb - xa) / 2.0;
          if (!(mid < xb)) mid = xa;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    const auto bf = static_cast<std::size_t>(best_feature);
    std::size_t left_count = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t pos = order_[bf][i];
      goes_left_[pos] = value(pos, bf) <= best_threshold;
      left_count += goes_left_[pos];
    }
    for (auto& ord : order_) {
      auto mid = std::stable_partition(ord.begin() + static_cast<std::ptrdiff_t>(begin),
                                       ord.begin() + static_cast<std::ptrdiff_t>(end),
                                       [&](std::uint32_t pos) { return goes_left_[pos] != 0; });
      (void)mid;
    }

    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    nodes_[id].impurity_decrease = best_score;
    const int l = grow(begin, begin + left_count, depth + 1);
    const int r = grow(begin + left_count, end, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  const Matrix& x_;
  TreeParams params_;
  std::size_t n_;
  std::vector<std::size_t> rows_;
  std::vector<double> y_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<unsigned char> goes_left_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree::RegressionTree(std::vector<TreeNode> nodes, std::size_t features)
    : nodes_(std::move(nodes)), features_(features) {
  if (nodes_.empty()) throw UserError("regression tree without nodes");
  for (const auto& n : nodes_) {
    if (n.feature < 0) continue;
    if (static_cast<std::size_t>(n.feature) >= features_ || n.left <= 0 || n.right <= 0 ||
        static_cast<std::size_t>(n.left) >= nodes_.size() || static_cast<std::size_t>(n.right) >= nodes_.size())
      throw UserError("malformed regression tree");
  }
}

RegressionTree RegressionTree::fit(const Matrix& x, std::span<const double> y, std::span<const std::size_t> sample_rows,
                                   const TreeParams& params) {
  if (sample_rows.empty()) throw UserError("cannot fit a tree on zero samples");
  if (y.size() != x.rows) throw UserError("target length does not match row count");
  RegressionTree t;
  t.features_ = x.cols;
  t.nodes_ = TreeBuilder(x, y, sample_rows, params).build();
  return t;
}

RegressionTree RegressionTree::fit(const Matrix& x, std::span<const double> y, const TreeParams& params) {
  std::vector<std::size_t> rows(x.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit(x, y, rows, params);
}

double RegressionTree::predict(std::span<const double> row) const {
  int i = 0;
  while (nodes_[i].feature >= 0)
    i = row[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

std::vector<double> RegressionTree::impurity_importance() const {
  std::vector<double> imp(features_, 0.0);
  for (const auto& n : nodes_)
    if (n.feature >= 0) imp[static_cast<std::size_t>(n.feature)] += n.impurity_decrease;
  return imp;
}

}  // namespace outage

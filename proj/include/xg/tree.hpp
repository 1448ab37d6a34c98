#pragma once

// CART growth shared by the random forest (Gini on 0/1 labels) and gradient
// boosting (squared error on residuals). Trees are stored flat; node 0 is the
// root and every split sends `value <= threshold` to the left child.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "xg/error.hpp"
#include "xg/feature_table.hpp"
#include "xg/rng.hpp"

namespace xg {

struct TreeNode {
  std::int32_t column = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf payload: positive fraction or additive score
  std::uint32_t n_samples = 0;

  bool is_leaf() const { return column < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.column)] <= n.threshold ? n.left
                                                                                          : n.right);
    }
    return nodes[i];
  }

  double predict(std::span<const double> row) const { return leaf_for(row).value; }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  bool operator==(const Tree&) const = default;
};

struct TreeGrowth {
  std::size_t mtry = 0;       // 0: every column is a candidate
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;  // 0: unlimited
};

enum class SplitCriterion { Gini, SquaredError };

/// Column-major copy of a table's matrix; trees scan one column at a time.
class ColumnMatrix {
 public:
  explicit ColumnMatrix(const FeatureTable& table)
      : rows_(table.rows()), cols_(table.cols()), data_(rows_ * cols_), binary_(cols_, true) {
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        const double v = table.values[i * cols_ + j];
        data_[j * rows_ + i] = v;
        if (v != 0.0 && v != 1.0) binary_[j] = false;
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  const double* column(std::size_t j) const { return data_.data() + j * rows_; }
  bool binary(std::size_t j) const { return binary_[j]; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
  std::vector<bool> binary_;
};

namespace detail {

struct SplitChoice {
  std::int32_t column = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
  std::size_t n_left = 0;
};

class TreeGrower {
 public:
  TreeGrower(const ColumnMatrix& x, std::span<const double> target, SplitCriterion criterion,
             const TreeGrowth& growth)
      : x_(x), target_(target), criterion_(criterion), growth_(growth) {
    if (growth_.min_leaf == 0) growth_.min_leaf = 1;
    if (growth_.mtry == 0 || growth_.mtry > x.cols()) growth_.mtry = x.cols();
  }

  template <typename LeafFn>
  Tree grow(std::vector<std::size_t> rows, Rng& rng, LeafFn&& leaf_value) {
    Tree tree;
    if (rows.empty()) throw Error(ErrorCode::EmptyTable, "cannot grow a tree on zero rows");
    struct Task {
      std::size_t node, begin, end, depth;
    };
    std::vector<Task> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, rows.size(), 0});
    std::vector<std::size_t> order(x_.cols());
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      std::span<std::size_t> span(rows.data() + task.begin, task.end - task.begin);
      SplitChoice best;
      if (splittable(span, task.depth)) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(growth_.mtry));
        std::sort(first.begin(), first.end());
        const double parent = parent_score(span);
        for (std::size_t j : first) evaluate(span, j, parent, best);
        for (std::size_t k = growth_.mtry; best.column < 0 && k < order.size(); ++k)
          evaluate(span, order[k], parent, best);
      }
      TreeNode& node = tree.nodes[task.node];
      node.n_samples = static_cast<std::uint32_t>(span.size());
      if (best.column < 0) {
        node.value = leaf_value(std::span<const std::size_t>(span.data(), span.size()));
        continue;
      }
      const auto col = static_cast<std::size_t>(best.column);
      const double thr = best.threshold;
      auto mid = std::partition(span.begin(), span.end(),
                                [&](std::size_t r) { return x_(r, col) <= thr; });
      const std::size_t split_at = task.begin + static_cast<std::size_t>(mid - span.begin());
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& parent_node = tree.nodes[task.node];
      parent_node.column = best.column;
      parent_node.threshold = thr;
      parent_node.left = left;
      parent_node.right = left + 1;
      stack.push_back({static_cast<std::size_t>(left + 1), split_at, task.end, task.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), task.begin, split_at, task.depth + 1});
    }
    return tree;
  }

 private:
  // Node score whose increase measures impurity decrease: sum over children
  // of (s^2 + (n - s)^2) / n for Gini, s^2 / n for squared error.
  double score(double n, double s) const {
    if (criterion_ == SplitCriterion::Gini) return (s * s + (n - s) * (n - s)) / n;
    return s * s / n;
  }

  double parent_score(std::span<const std::size_t> rows) const {
    double s = 0.0;
    for (std::size_t r : rows) s += target_[r];
    return score(static_cast<double>(rows.size()), s);
  }

  bool splittable(std::span<const std::size_t> rows, std::size_t depth) const {
    if (growth_.max_depth != 0 && depth >= growth_.max_depth) return false;
    if (rows.size() < 2 * growth_.min_leaf) return false;
    const double first = target_[rows[0]];
    for (std::size_t r : rows)
      if (target_[r] != first) return true;
    return false;  // pure node
  }

  void consider(std::size_t column, double threshold, double gain, std::size_t n_left,
                SplitChoice& best) const {
    // Candidates arrive in ascending (column, threshold) order, so a strict
    // comparison keeps the lexicographically smallest among equal gains.
    if (gain > best.gain) best = {static_cast<std::int32_t>(column), threshold, gain, n_left};
  }

  void evaluate(std::span<const std::size_t> rows, std::size_t j, double parent,
                SplitChoice& best) {
    const double* col = x_.column(j);
    const std::size_t n = rows.size();
    const std::size_t min_leaf = growth_.min_leaf;
    if (x_.binary(j)) {
      std::size_t n1 = 0;
      double s1 = 0.0, s = 0.0;
      for (std::size_t r : rows) {
        s += target_[r];
        if (col[r] != 0.0) {
          ++n1;
          s1 += target_[r];
        }
      }
      const std::size_t n0 = n - n1;
      if (n0 < min_leaf || n1 < min_leaf || n0 == 0 || n1 == 0) return;
      const double gain = score(static_cast<double>(n0), s - s1) + score(static_cast<double>(n1), s1) - parent;
      consider(j, 0.5, gain, n0, best);
      return;
    }
    scratch_.clear();
    scratch_.reserve(n);
    double total = 0.0;
    for (std::size_t r : rows) {
      scratch_.emplace_back(col[r], target_[r]);
      total += target_[r];
    }
    std::sort(scratch_.begin(), scratch_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (scratch_.front().first == scratch_.back().first) return;
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += scratch_[i].second;
      const std::size_t n_left = i + 1;
      if (scratch_[i].first == scratch_[i + 1].first) continue;
      if (n_left < min_leaf) continue;
      if (n - n_left < min_leaf) break;
      const double gain = score(static_cast<double>(n_left), left_sum) +
                          score(static_cast<double>(n - n_left), total - left_sum) - parent;
      if (gain > best.gain) {
        const double lo = scratch_[i].first, hi = scratch_[i + 1].first;
        double thr = lo + (hi - lo) / 2.0;
        if (!(thr >= lo && thr < hi)) thr = lo;
        consider(j, thr, gain, n_left, best);
      }
    }
  }

  const ColumnMatrix& x_;
  std::span<const double> target_;
  SplitCriterion criterion_;
  TreeGrowth growth_;
  std::vector<std::pair<double, double>> scratch_;
};

}  // namespace detail

/// Single CART classification tree on every row of `table`; leaves hold the
/// positive-class fraction of the rows they received.
inline Tree fit_tree(const FeatureTable& table, const TreeGrowth& growth, Rng& rng) {
  if (table.empty()) throw Error(ErrorCode::EmptyTable, "fit_tree on an empty table");
  ColumnMatrix x(table);
  std::vector<double> target(table.labels.begin(), table.labels.end());
  detail::TreeGrower grower(x, target, SplitCriterion::Gini, growth);
  std::vector<std::size_t> rows(table.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return grower.grow(std::move(rows), rng, [&](std::span<const std::size_t> leaf) {
    double s = 0.0;
    for (std::size_t r : leaf) s += target[r];
    return s / static_cast<double>(leaf.size());
  });
}

}  // namespace xg

#pragma once

// Tree ensembles: bagged random forests with vote-share probabilities and
// logistic-loss gradient boosting. A fitted EnsembleModel is immutable and
// safe to share across threads for prediction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xg/error.hpp"
#include "xg/feature_table.hpp"
#include "xg/parallel.hpp"
#include "xg/rng.hpp"
#include "xg/tree.hpp"

namespace xg {

enum class ModelKind { RandomForest, Gbt };
enum class VoteMode { HardVote, LeafProb };

inline std::string_view to_string(ModelKind k) {
  return k == ModelKind::RandomForest ? "random_forest" : "gbt";
}
inline std::string_view to_string(VoteMode v) {
  return v == VoteMode::HardVote ? "hard_vote" : "leaf_prob";
}

struct ForestParams {
  std::size_t n_trees = 500;
  std::size_t mtry = 0;  // 0: ceil(sqrt(d))
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;  // 0: unlimited
  bool bootstrap = true;
  VoteMode vote_mode = VoteMode::HardVote;
  std::size_t threads = 0;  // 0: hardware concurrency; never affects results

  bool operator==(const ForestParams& o) const {
    return n_trees == o.n_trees && mtry == o.mtry && min_leaf == o.min_leaf &&
           max_depth == o.max_depth && bootstrap == o.bootstrap && vote_mode == o.vote_mode;
  }
};

struct GbtParams {
  std::size_t n_rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 6;
  std::size_t min_leaf = 20;
  double subsample = 1.0;

  bool operator==(const GbtParams&) const = default;
};

struct TrainMeta {
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  double class_prior = 0.0;
  std::string balance_method = "none";
  std::vector<double> loss_history;  // gbt: training log-loss after each round (index 0 = prior)

  bool operator==(const TrainMeta&) const = default;
};

struct EnsembleModel {
  ModelKind kind = ModelKind::RandomForest;
  std::vector<Tree> trees;
  FeatureSchema schema;
  std::variant<ForestParams, GbtParams> params;
  TrainMeta meta;
  double base_score = 0.0;  // gbt: initial log-odds

  const ForestParams& forest_params() const { return std::get<ForestParams>(params); }
  const GbtParams& gbt_params() const { return std::get<GbtParams>(params); }
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

inline void check_trainable(const FeatureTable& table) {
  if (table.empty()) throw Error(ErrorCode::EmptyTable, "training table is empty");
  if (table.has_origin(RowOrigin::Test))
    throw Error(ErrorCode::LeakedTestRows, "training table contains test-partition rows");
  const std::size_t pos = table.count(1);
  if (pos == 0 || pos == table.rows())
    throw Error(ErrorCode::DegenerateClass, "training needs both classes present");
}

/// Row indices in ascending row_key order. Bags and subsamples are drawn
/// against this ordering so permuting the input rows changes nothing.
inline std::vector<std::size_t> canonical_order(const FeatureTable& table) {
  std::vector<std::size_t> order(table.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.row_keys[a] < table.row_keys[b];
  });
  return order;
}

inline double log_loss_term(double y, double score) {
  // -[y log p + (1-y) log(1-p)] with p = sigmoid(score), computed stably.
  const double softplus = score > 0 ? score + std::log1p(std::exp(-score)) : std::log1p(std::exp(score));
  return softplus - y * score;
}

}  // namespace detail

/// Bag for tree `tree_index`: n draws with replacement from the canonical
/// row ordering (or the ordering itself when bootstrap is off).
inline std::vector<std::size_t> forest_bag(const FeatureTable& table, std::uint64_t seed,
                                           std::size_t tree_index, bool bootstrap = true) {
  auto order = detail::canonical_order(table);
  if (!bootstrap) return order;
  Rng rng(seed, Stream::ForestTree, tree_index);
  std::vector<std::size_t> bag(order.size());
  for (auto& b : bag) b = order[rng.index(order.size())];
  return bag;
}

inline std::size_t resolve_mtry(std::size_t mtry, std::size_t d) {
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  return std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(d, 1));
}

inline EnsembleModel fit_forest(const FeatureTable& table, const ForestParams& params,
                                std::uint64_t seed) {
  detail::check_trainable(table);
  if (params.n_trees == 0) throw Error(ErrorCode::OutOfRange, "n_trees must be >= 1");
  if (params.mtry > table.cols()) throw Error(ErrorCode::OutOfRange, "mtry exceeds column count");

  EnsembleModel model;
  model.kind = ModelKind::RandomForest;
  model.schema = table.schema;
  model.params = params;
  model.meta.seed = seed;
  model.meta.n_train = table.rows();
  model.meta.class_prior = static_cast<double>(table.count(1)) / static_cast<double>(table.rows());

  const ColumnMatrix x(table);
  const std::vector<double> target(table.labels.begin(), table.labels.end());
  const auto order = detail::canonical_order(table);
  const TreeGrowth growth{resolve_mtry(params.mtry, table.cols()), params.min_leaf, params.max_depth};

  model.trees.resize(params.n_trees);
  parallel_for(
      params.n_trees,
      [&](std::size_t t) {
        Rng rng(seed, Stream::ForestTree, t);
        std::vector<std::size_t> bag(order.size());
        if (params.bootstrap) {
          for (auto& b : bag) b = order[rng.index(order.size())];
        } else {
          bag = order;
        }
        detail::TreeGrower grower(x, target, SplitCriterion::Gini, growth);
        model.trees[t] = grower.grow(std::move(bag), rng, [&](std::span<const std::size_t> leaf) {
          double s = 0.0;
          for (std::size_t r : leaf) s += target[r];
          return s / static_cast<double>(leaf.size());
        });
      },
      params.threads);
  return model;
}

/// Logistic-loss gradient boosting. Each round fits a squared-error tree to
/// the residuals y - p; leaf values are damped Newton steps
/// learning_rate * sum(r) / sum(p(1-p)), halved until the leaf's training
/// loss does not increase. Stored leaf values already include the damping.
inline EnsembleModel fit_gbt(const FeatureTable& table, const GbtParams& params, std::uint64_t seed) {
  detail::check_trainable(table);
  if (!(params.learning_rate >= 0.0 && params.learning_rate <= 1.0))
    throw Error(ErrorCode::OutOfRange, "learning_rate must lie in [0, 1]");
  if (!(params.subsample > 0.0 && params.subsample <= 1.0))
    throw Error(ErrorCode::OutOfRange, "subsample must lie in (0, 1]");

  EnsembleModel model;
  model.kind = ModelKind::Gbt;
  model.schema = table.schema;
  model.params = params;
  model.meta.seed = seed;
  model.meta.n_train = table.rows();
  const double prior = static_cast<double>(table.count(1)) / static_cast<double>(table.rows());
  model.meta.class_prior = prior;
  model.base_score = std::log(prior / (1.0 - prior));

  const std::size_t n = table.rows();
  const ColumnMatrix x(table);
  const std::vector<double> y(table.labels.begin(), table.labels.end());
  const auto order = detail::canonical_order(table);
  std::vector<double> score(n, model.base_score), residual(n), hess(n);

  auto total_loss = [&] {
    double l = 0.0;
    for (std::size_t i = 0; i < n; ++i) l += detail::log_loss_term(y[i], score[i]);
    return l / static_cast<double>(n);
  };
  model.meta.loss_history.push_back(total_loss());

  const std::size_t rounds = params.learning_rate == 0.0 ? 0 : params.n_rounds;
  const TreeGrowth growth{0, params.min_leaf, params.max_depth};
  for (std::size_t m = 0; m < rounds; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      residual[i] = y[i] - p;
      hess[i] = p * (1.0 - p);
    }
    Rng rng(seed, Stream::GbtRound, m);
    std::vector<std::size_t> rows = order;
    if (params.subsample < 1.0) {
      rng.shuffle(rows);
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));
      rows.resize(keep);
      std::sort(rows.begin(), rows.end(),
                [&](std::size_t a, std::size_t b) { return table.row_keys[a] < table.row_keys[b]; });
    }
    detail::TreeGrower grower(x, residual, SplitCriterion::SquaredError, growth);
    Tree tree = grower.grow(std::move(rows), rng, [&](std::span<const std::size_t> leaf) {
      double num = 0.0, den = 0.0;
      for (std::size_t r : leaf) {
        num += residual[r];
        den += hess[r];
      }
      if (den <= 0.0) return 0.0;
      double step = params.learning_rate * num / den;
      auto leaf_loss = [&](double delta) {
        double l = 0.0;
        for (std::size_t r : leaf) l += detail::log_loss_term(y[r], score[r] + delta);
        return l;
      };
      const double base = leaf_loss(0.0);
      for (int k = 0; k < 60 && leaf_loss(step) > base; ++k) step /= 2.0;
      return leaf_loss(step) > base ? 0.0 : step;
    });
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> row(table.values.data() + i * table.cols(), table.cols());
      score[i] += tree.predict(row);
    }
    model.trees.push_back(std::move(tree));
    model.meta.loss_history.push_back(total_loss());
  }
  return model;
}

/// Probability of a goal for one encoded row.
inline double predict_row(const EnsembleModel& model, std::span<const double> row) {
  if (model.kind == ModelKind::Gbt) {
    double f = model.base_score;
    for (const auto& t : model.trees) f += t.predict(row);
    return sigmoid(f);
  }
  const bool hard = model.forest_params().vote_mode == VoteMode::HardVote;
  double sum = 0.0;
  for (const auto& t : model.trees) {
    const double pf = t.predict(row);
    if (!hard)
      sum += pf;
    else if (pf > 0.5)
      sum += 1.0;
    else if (pf == 0.5)
      sum += 0.5;
  }
  return sum / static_cast<double>(model.trees.size());
}

/// predict_row for `row` with `column` set to each of the ascending `points`.
/// Each tree is walked once; nodes testing `column` split the grid range
/// instead of being evaluated point by point. Results equal predict_row.
inline std::vector<double> predict_sweep(const EnsembleModel& model, std::span<const double> row,
                                         std::size_t column, std::span<const double> points) {
  const std::size_t m = points.size();
  const bool gbt = model.kind == ModelKind::Gbt;
  const bool hard = !gbt && model.forest_params().vote_mode == VoteMode::HardVote;
  std::vector<double> acc(m, gbt ? model.base_score : 0.0);
  struct Pending {
    std::size_t node, lo, hi;
  };
  std::vector<Pending> stack;
  for (const auto& t : model.trees) {
    stack.push_back({0, 0, m});
    while (!stack.empty()) {
      auto [i, lo, hi] = stack.back();
      stack.pop_back();
      const auto& n = t.nodes[i];
      if (n.is_leaf()) {
        double add = n.value;
        if (hard) add = n.value > 0.5 ? 1.0 : n.value == 0.5 ? 0.5 : 0.0;
        if (gbt || !hard || add != 0.0)
          for (std::size_t g = lo; g < hi; ++g) acc[g] += add;
        continue;
      }
      const auto left = static_cast<std::size_t>(n.left), right = static_cast<std::size_t>(n.right);
      if (static_cast<std::size_t>(n.column) != column) {
        stack.push_back({row[static_cast<std::size_t>(n.column)] <= n.threshold ? left : right, lo, hi});
        continue;
      }
      const auto split = static_cast<std::size_t>(
          std::upper_bound(points.begin() + static_cast<std::ptrdiff_t>(lo),
                           points.begin() + static_cast<std::ptrdiff_t>(hi), n.threshold) -
          points.begin());
      if (split < hi) stack.push_back({right, split, hi});
      if (lo < split) stack.push_back({left, lo, split});
    }
  }
  for (double& v : acc) v = gbt ? sigmoid(v) : v / static_cast<double>(model.trees.size());
  return acc;
}

inline void check_schema(const EnsembleModel& model, const FeatureSchema& schema) {
  if (!(model.schema == schema))
    throw Error(ErrorCode::SchemaMismatch, "rows were not encoded against the model's column schema");
}

inline std::vector<double> predict_proba(const EnsembleModel& model, const FeatureTable& rows,
                                         std::size_t threads = 0) {
  check_schema(model, rows.schema);
  std::vector<double> out(rows.rows());
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (rows.rows() + kChunk - 1) / kChunk;
  parallel_for(
      chunks,
      [&](std::size_t c) {
        const std::size_t end = std::min(rows.rows(), (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) out[i] = predict_row(model, rows.row(i));
      },
      threads);
  return out;
}

}  // namespace xg
